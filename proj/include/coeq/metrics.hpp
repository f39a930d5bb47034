#pragma once

#include "coeq/channel.hpp"
#include "coeq/constellation.hpp"
#include "coeq/types.hpp"

namespace coeq {

/// Normalized residual interference of one output stream:
/// (sum |c|^2 - max |c|^2) / max |c|^2 over all sources and taps.
/// Throws UndefinedMetric on an all-zero response.
double isi_linear(const CombinedResponse& cr, int stream);

/// Sum of the per-stream normalized ISI values (linear domain).
double sum_isi_linear(const CombinedResponse& cr);

/// Row-wise normalized cross-channel interference of an instantaneous
/// combined matrix (streams x sources).
double ncci_linear(const MatrixXc& combined, int stream);

/// Average NCCI over all streams (linear domain).
double average_ncci_linear(const MatrixXc& combined);

/// Single-tap combined matrix (tap k = 0) of an instantaneous scenario.
MatrixXc combined_matrix(const CombinedResponse& cr);

/// Symbol error rate with the blind ambiguities resolved from the known
/// combined response: the dominant tap fixes the source, the delay, and the
/// complex gain used to open the decision device. y[p] is the output at
/// frame time y_offset + p.
double ser(const VectorXc& y, int y_offset, const SignalFrame& frame,
           const Constellation& c, const CombinedResponse& cr, int stream);

}  // namespace coeq
