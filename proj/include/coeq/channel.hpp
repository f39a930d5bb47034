#pragma once

#include <cstdint>
#include <vector>

#include "coeq/constellation.hpp"
#include "coeq/types.hpp"

namespace coeq {

/// Complex FIR impulse responses h[rx][tx][m] of an n_tx x n_rx multipath
/// channel. All sub-channels share the same length L_h + 1; individual
/// sub-channels may be all-zero, the channel as a whole must not be.
struct ChannelModel {
    int n_tx = 1;
    int n_rx = 1;
    std::vector<std::vector<std::vector<cplx>>> taps;  // [rx][tx][m]

    int order() const { return static_cast<int>(taps.at(0).at(0).size()) - 1; }  // L_h
};

/// SISO channel from a single tap vector.
ChannelModel make_siso_channel(const std::vector<cplx>& h);

/// Validates dimensions and the nonzero requirement; throws InvalidInput.
void validate_channel(const ChannelModel& ch);

/// One simulated burst: sources s[n](k), receiver outputs x[j](k), both with
/// k = 0..K-1. Regenerating with the same seed reproduces the arrays
/// bit-for-bit.
struct SignalFrame {
    MatrixXc sources;   // n_tx x K
    MatrixXc received;  // n_rx x K
    double noise_variance = 0.0;
    std::uint64_t seed = 0;

    int n_tx() const { return static_cast<int>(sources.rows()); }
    int n_rx() const { return static_cast<int>(received.rows()); }
    int length() const { return static_cast<int>(sources.cols()); }
};

/// FIR equalizer bank w[stream][rx][l], l = 0..L_w. The per-stream stacked
/// vector has complex length n_rx * (L_w + 1).
struct EqualizerBank {
    int n_streams = 1;
    int n_rx = 1;
    int order = 0;  // L_w
    std::vector<std::vector<std::vector<cplx>>> coeffs;  // [stream][rx][l]

    int stacked_len() const { return n_rx * (order + 1); }
};

/// Antenna-major stacked coefficient vector of one stream.
VectorXc stacked_equalizer(const EqualizerBank& eq, int stream);

/// Bank with a single stream built from a stacked coefficient vector.
EqualizerBank equalizer_from_stacked(const VectorXc& w, int n_rx, int L_w);

/// Sources are i.i.d. uniform over the alphabet; receiver outputs follow the
/// channel convolution (zero prehistory) plus circular complex AWGN. The
/// noise variance is set so that the per-receive-antenna average signal power
/// over noise power equals the linear SNR; pass +infinity for noiseless.
SignalFrame generate_frame(const Constellation& c, const ChannelModel& ch, int K,
                           double snr_db, std::uint64_t seed);

/// Stacked regressor x(k) = [x_1(k)..x_1(k-L_w), x_2(k).., ...], length
/// n_rx * (L_w + 1). Requires L_w <= k < K so the delay line is populated.
VectorXc build_regressor(const SignalFrame& frame, int L_w, int k);

/// Equalizer output y(k) = w^H x(k) for k = L_w..K-1 (earlier samples are
/// skipped, no zero padding).
VectorXc equalizer_output(const SignalFrame& frame, const VectorXc& w, int L_w);

/// Combined channel-equalizer response c[stream][source](k), k = 0..L_h+L_w,
/// in the convention where conj(c) convolved with the sources reproduces the
/// equalizer output on noiseless data.
struct CombinedResponse {
    std::vector<std::vector<std::vector<cplx>>> taps;  // [stream][source][k]

    double total_energy(int stream) const;
};

CombinedResponse combined_response(const ChannelModel& ch, const EqualizerBank& eq);

}  // namespace coeq
