#include "coeq/costs.hpp"

#include <cmath>

#include "coeq/errors.hpp"

namespace coeq {

CostCoefficients cma_cost(const MomentModel& m, double R2) {
    if (R2 <= 0.0) throw InvalidInput("cma_cost: R2 must be positive");
    CostCoefficients c;
    c.A22 = m.C;
    c.A20 = -R2 * m.b;
    c.A00 = R2 * R2;
    c.label = "cma";
    c.params["R2"] = R2;
    return c;
}

CostCoefficients swa_cost(const MomentModel& m, double sigma_s2, double kurtosis,
                          double alpha) {
    if (sigma_s2 <= 0.0) throw InvalidInput("swa_cost: sigma_s2 must be positive");
    const double s4 = sigma_s2 * sigma_s2;
    CostCoefficients c;
    c.A22 = m.C - (2.0 + (1.0 + alpha) * kurtosis / s4) * (m.b * m.b.transpose());
    c.A20 = (alpha * kurtosis / sigma_s2) * m.b;
    c.A00 = 0.0;
    c.label = "swa";
    c.params["alpha"] = alpha;
    return c;
}

CostCoefficients med_cost(const MomentModel& m, double sigma_s2, double lambda_p) {
    if (lambda_p < 0.0) throw InvalidInput("med_cost: lambda_p must be nonnegative");
    CostCoefficients c;
    c.A22 = m.C + lambda_p * (m.b * m.b.transpose());
    c.A20 = -lambda_p * sigma_s2 * m.b;
    c.A00 = lambda_p * sigma_s2 * sigma_s2;
    c.label = "med";
    c.params["lambda_p"] = lambda_p;
    return c;
}

VectorXd cross_corr_penalty(const std::vector<VectorXc>& prev, const SignalFrame& frame,
                            int L_w, int delta) {
    if (delta < 0) throw InvalidInput("cross_corr_penalty: delta must be nonnegative");
    const int K = frame.length();
    const int N = frame.n_rx() * (L_w + 1);
    const int n2 = 2 * N;
    const int d = n2 * (n2 + 1) / 2;
    VectorXd q = VectorXd::Zero(d);
    if (prev.empty()) return q;
    for (const auto& w : prev)
        if (w.size() != N) throw InvalidInput("cross_corr_penalty: equalizer length mismatch");

    for (int l = -delta; l <= delta; ++l) {
        // R_l = avg_k x(k) x(k-l)^H over k with both regressors populated.
        const int k_lo = L_w + std::max(0, l);
        const int k_hi = K - 1 + std::min(0, l);
        if (k_hi < k_lo) throw InvalidInput("cross_corr_penalty: lag exceeds frame");
        MatrixXc R = MatrixXc::Zero(N, N);
        for (int k = k_lo; k <= k_hi; ++k)
            R += build_regressor(frame, L_w, k) * build_regressor(frame, L_w, k - l).adjoint();
        R /= static_cast<double>(k_hi - k_lo + 1);

        for (const auto& w : prev) {
            const VectorXc p = R.adjoint() * w;  // (w^H R)^H
            const VectorXd pr = real_split_r(p);
            const VectorXd pi = real_split_i(p);
            q += svec(pr * pr.transpose() + pi * pi.transpose());
        }
    }
    return q;
}

CostCoefficients penalty_cost(const VectorXd& q) {
    CostCoefficients c;
    c.A22 = MatrixXd::Zero(q.size(), q.size());
    c.A20 = 0.5 * q;  // 2 A20' v contributes q' v
    c.A00 = 0.0;
    c.label = "cross-corr";
    return c;
}

CostCoefficients training_cost(const SignalFrame& frame, int L_w,
                               const std::vector<cplx>& pilots, int d) {
    if (d < 0) throw InvalidInput("training_cost: negative decision delay");
    if (pilots.empty()) throw InvalidInput("training_cost: no pilots");
    const int K = frame.length();
    const int n2 = 2 * frame.n_rx() * (L_w + 1);
    const int dim = n2 * (n2 + 1) / 2;

    // Real-interleaved pilot scalars and regressors: each usable pilot t
    // yields (x_r(t+d), Re s_t) and (x_i(t+d), Im s_t).
    std::vector<VectorXd> xt;
    std::vector<double> st;
    for (int t = 0; t < static_cast<int>(pilots.size()); ++t) {
        const int k = t + d;
        if (k >= K) throw InvalidInput("training_cost: pilot index out of data range");
        if (k < L_w) continue;  // regressor not formable, no zero padding
        const VectorXc x = build_regressor(frame, L_w, k);
        xt.push_back(real_split_r(x));
        st.push_back(pilots[t].real());
        xt.push_back(real_split_i(x));
        st.push_back(pilots[t].imag());
    }
    if (xt.empty()) throw InvalidInput("training_cost: no usable pilot positions");

    CostCoefficients c;
    c.A22 = MatrixXd::Zero(dim, dim);
    c.A20 = VectorXd::Zero(dim);
    c.A00 = 0.0;
    const int P = static_cast<int>(xt.size());
    for (int p = 0; p < P; ++p)
        for (int q = p; q < P; ++q) {
            const VectorXd X = svec(
                0.5 * (xt[p] * xt[q].transpose() + xt[q] * xt[p].transpose()));
            const double ss = st[p] * st[q];
            c.A22.selfadjointView<Eigen::Lower>().rankUpdate(X);
            c.A20 -= ss * X;
            c.A00 += ss * ss;
        }
    // Average over the pair terms. The blind costs are sample averages, so
    // the semiblind blend lambda J_b + (1-lambda) J_t only mixes comparable
    // scales when the pilot cost is averaged too; the minimizers of the pure
    // pilot cost are unchanged.
    const double pairs = static_cast<double>(P) * (P + 1) / 2.0;
    c.A22 = MatrixXd(c.A22.selfadjointView<Eigen::Lower>()) / pairs;
    c.A20 /= pairs;
    c.A00 /= pairs;
    c.label = "training";
    c.params["L_t"] = static_cast<double>(pilots.size());
    c.params["d"] = static_cast<double>(d);
    c.params["pair_terms"] = pairs;
    return c;
}

CostCoefficients combine(const std::vector<std::pair<CostCoefficients, double>>& costs) {
    if (costs.empty()) throw InvalidInput("combine: empty cost list");
    const int dim = costs.front().first.dim();
    CostCoefficients out;
    out.A22 = MatrixXd::Zero(dim, dim);
    out.A20 = VectorXd::Zero(dim);
    out.A00 = 0.0;
    std::string label;
    for (const auto& [c, w] : costs) {
        if (c.dim() != dim || c.A22.rows() != dim)
            throw InvalidInput("combine: dimension mismatch");
        out.A22 += w * c.A22;
        out.A20 += w * c.A20;
        out.A00 += w * c.A00;
        if (!label.empty()) label += "+";
        label += c.label;
        for (const auto& [k, v] : c.params) out.params[k] = v;
    }
    out.label = label;
    return out;
}

double evaluate_cost(const CostCoefficients& c, const VectorXd& u) {
    const VectorXd v = qvec(u);
    if (v.size() != c.A20.size()) throw InvalidInput("evaluate_cost: dimension mismatch");
    return v.dot(c.A22 * v) + 2.0 * c.A20.dot(v) + c.A00;
}

double evaluate_cost_best_scale(const CostCoefficients& c, const VectorXd& u) {
    const VectorXd v = qvec(u);
    if (v.size() != c.A20.size())
        throw InvalidInput("evaluate_cost_best_scale: dimension mismatch");
    // f(g u) = a t^2 + 2 b t + A00 with t = g^2 >= 0.
    const double a = v.dot(c.A22 * v);
    const double b = c.A20.dot(v);
    if (a <= 0.0) return evaluate_cost(c, u);  // not coercive along this ray
    const double t = std::max(0.0, -b / a);
    return a * t * t + 2.0 * b * t + c.A00;
}

int select_delay(const SignalFrame& frame, int L_w, const std::vector<cplx>& pilots,
                 const VectorXc& w, int d_max) {
    if (pilots.empty()) throw InvalidInput("select_delay: no pilots");
    const int K = frame.length();
    int best_d = 0;
    double best_score = -1.0;
    for (int d = 0; d <= d_max; ++d) {
        cplx corr = 0.0;
        double ey = 0.0, es = 0.0;
        for (int t = 0; t < static_cast<int>(pilots.size()); ++t) {
            const int k = t + d;
            if (k < L_w || k >= K) continue;
            const cplx y = w.dot(build_regressor(frame, L_w, k));  // w^H x
            corr += y * std::conj(pilots[t]);
            ey += std::norm(y);
            es += std::norm(pilots[t]);
        }
        if (ey <= 0.0 || es <= 0.0) continue;
        const double score = std::norm(corr) / (ey * es);
        if (score > best_score) {
            best_score = score;
            best_d = d;
        }
    }
    return best_d;
}

}  // namespace coeq
