#include "coeq/baselines.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "coeq/constellation.hpp"
#include "coeq/errors.hpp"
#include "coeq/metrics.hpp"

namespace coeq {

VectorXd cost_gradient(const CostCoefficients& c, const VectorXd& u) {
    const VectorXd v = qvec(u);
    if (v.size() != c.A20.size()) throw InvalidInput("cost_gradient: dimension mismatch");
    return 4.0 * (svec_inv(c.A22 * v + c.A20) * u);
}

BgdResult run_bgd(const CostCoefficients& c, const VectorXd& u0, const BgdSettings& s) {
    if (s.step <= 0.0) throw InvalidInput("run_bgd: step must be positive");
    BgdResult r;
    r.u = u0;
    double prev = evaluate_cost(c, r.u);
    r.trace.push_back(prev);
    for (int it = 1; it <= s.max_iters; ++it) {
        r.u -= s.step * cost_gradient(c, r.u);
        const double f = evaluate_cost(c, r.u);
        r.trace.push_back(f);
        r.iters = it;
        if (!std::isfinite(f) || f > s.divergence_cost)
            throw DivergenceError("run_bgd: cost exceeded divergence threshold",
                                  std::move(r.trace));
        if (std::abs(prev - f) < s.cost_change_tol) break;
        prev = f;
    }
    return r;
}

EqualizerBank optimal_linear_equalizer(const ChannelModel& ch, int L_w, double snr_db) {
    validate_channel(ch);
    const int L_h = ch.order();
    const int N = ch.n_rx * (L_w + 1);
    const int delays = L_h + L_w + 1;
    const int cols = ch.n_tx * delays;

    // x(k) = T sbar(k): T[(j,l), (n,d)] = h_{j,n}(d - l).
    MatrixXc T = MatrixXc::Zero(N, cols);
    for (int j = 0; j < ch.n_rx; ++j)
        for (int l = 0; l <= L_w; ++l)
            for (int n = 0; n < ch.n_tx; ++n)
                for (int d = l; d <= l + L_h; ++d)
                    T(j * (L_w + 1) + l, n * delays + d) = ch.taps[j][n][d - l];

    // Unit-power sources; noise variance per the frame-generation convention.
    double sigma_v2 = 0.0;
    if (std::isfinite(snr_db)) {
        double p_sum = 0.0;
        for (int j = 0; j < ch.n_rx; ++j) {
            double g = 0.0;
            for (int n = 0; n < ch.n_tx; ++n)
                for (const cplx& h : ch.taps[j][n]) g += std::norm(h);
            p_sum += g;
        }
        sigma_v2 = (p_sum / ch.n_rx) / from_db(snr_db);
    }

    MatrixXc R = T * T.adjoint();
    R.diagonal().array() += sigma_v2;
    Eigen::LDLT<MatrixXc> ldlt(R);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        R.diagonal().array() += 1e-10;  // ridge fallback for singular systems
        ldlt.compute(R);
    }

    EqualizerBank bank;
    bank.n_streams = ch.n_tx;
    bank.n_rx = ch.n_rx;
    bank.order = L_w;
    bank.coeffs.assign(ch.n_tx,
                       std::vector<std::vector<cplx>>(ch.n_rx, std::vector<cplx>(L_w + 1)));
    for (int n = 0; n < ch.n_tx; ++n) {
        double best = std::numeric_limits<double>::infinity();
        VectorXc best_w;
        for (int d = 0; d < delays; ++d) {
            const VectorXc w = ldlt.solve(T.col(n * delays + d));
            if (w.norm() < 1e-12) continue;  // delay unreachable through this channel
            EqualizerBank one = equalizer_from_stacked(w, ch.n_rx, L_w);
            const CombinedResponse cr = combined_response(ch, one);
            const double isi = isi_linear(cr, 0);
            if (isi < best) {
                best = isi;
                best_w = w;
            }
        }
        if (best_w.size() == 0)
            throw Error("optimal_linear_equalizer: no reachable delay");
        const EqualizerBank one = equalizer_from_stacked(best_w, ch.n_rx, L_w);
        bank.coeffs[n] = one.coeffs[0];
    }
    return bank;
}

}  // namespace coeq
