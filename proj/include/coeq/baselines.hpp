#pragma once

#include <vector>

#include "coeq/channel.hpp"
#include "coeq/costs.hpp"
#include "coeq/types.hpp"

namespace coeq {

/// Exact gradient of f(u) = qvec(u)'A22 qvec(u) + 2 A20' qvec(u) + A00
/// through the chain rule: grad = 4 svec_inv(A22 v + A20) u.
VectorXd cost_gradient(const CostCoefficients& c, const VectorXd& u);

struct BgdSettings {
    double step = 0.01;
    int max_iters = 200000;
    double cost_change_tol = 1e-10;
    double divergence_cost = 1e12;
};

struct BgdResult {
    VectorXd u;
    std::vector<double> trace;  // cost per iteration, including the start
    int iters = 0;
};

/// Plain fixed-step batch gradient descent. Throws DivergenceError (carrying
/// the trace) if the cost exceeds the divergence threshold.
BgdResult run_bgd(const CostCoefficients& c, const VectorXd& u0, const BgdSettings& s);

/// Known-channel linear MMSE equalizer per source, delay-searched: for each
/// candidate delay solves the regularized least-squares fit of the combined
/// response to a unit spike and keeps the delay with the smallest ISI.
EqualizerBank optimal_linear_equalizer(const ChannelModel& ch, int L_w, double snr_db);

}  // namespace coeq
