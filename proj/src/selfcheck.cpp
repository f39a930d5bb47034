#include "coeq/selfcheck.hpp"

#include <cmath>
#include <sstream>

#include "coeq/baselines.hpp"
#include "coeq/costs.hpp"
#include "coeq/errors.hpp"
#include "coeq/extraction.hpp"
#include "coeq/metrics.hpp"
#include "coeq/rng.hpp"
#include "coeq/scenario.hpp"
#include "coeq/sdp.hpp"

namespace coeq {

namespace {

VectorXd random_vec(Rng& rng, int n) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.gaussian();
    return v;
}

MatrixXd random_sym(Rng& rng, int n) {
    MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m(i, j) = m(j, i) = rng.gaussian();
    return m;
}

// Shared small frame for the statistical oracles.
SignalFrame oracle_frame(const Constellation& cst, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<cplx> h(3);
    for (auto& t : h) t = cplx(rng.gaussian(), rng.gaussian()) / std::sqrt(2.0);
    return generate_frame(cst, make_siso_channel(h), 400, 20.0, mix_seed(seed, 1));
}

CostCoefficients circle_cost() {
    // (u1^2 + u2^2 - 1)^2 over v = (u1^2, u1 u2, u2^2)
    CostCoefficients c;
    c.A22 = MatrixXd::Zero(3, 3);
    c.A22(0, 0) = c.A22(2, 2) = 1.0;
    c.A22(0, 2) = c.A22(2, 0) = 1.0;
    c.A20 = VectorXd::Zero(3);
    c.A20[0] = c.A20[2] = -1.0;
    c.A00 = 1.0;
    c.label = "circle";
    return c;
}

}  // namespace

std::vector<CheckResult> run_selfchecks() {
    std::vector<CheckResult> results;
    auto check = [&](const std::string& name, bool pass, const std::string& detail) {
        results.push_back({name, pass, detail});
    };
    const Constellation qpsk = make_qpsk();
    const ConstellationStats qstats = constellation_stats(qpsk);

    {  // svec/qvec roundtrip and duality
        Rng rng(101);
        const MatrixXd M = random_sym(rng, 12);
        const bool round = (svec_inv(svec(M)) - M).cwiseAbs().maxCoeff() == 0.0;
        double worst = 0.0;
        for (int t = 0; t < 50; ++t) {
            const VectorXd u = random_vec(rng, 12);
            const MatrixXd A = random_sym(rng, 12);
            worst = std::max(worst, std::abs(qvec(u).dot(svec(A)) - u.dot(A * u)));
        }
        const VectorXd w = random_vec(rng, 8);
        const VectorXd r1 = rank1_approx(qvec(w)).first;
        const double rank1_err = std::min((r1 - w).norm(), (r1 + w).norm());
        std::ostringstream d;
        d << "duality " << worst << ", rank1 " << rank1_err;
        check("svec-qvec-roundtrip-duality", round && worst <= 1e-10 && rank1_err <= 1e-9,
              d.str());
    }

    {  // moment model vs filter-and-average
        const SignalFrame f = oracle_frame(qpsk, 707);
        const MomentModel m = estimate_moments(f, 2);
        Rng rng(33);
        double worst2 = 0.0, worst4 = 0.0;
        for (int t = 0; t < 20; ++t) {
            const VectorXd u = random_vec(rng, m.n2);
            const VectorXc w = u_to_equalizer(u);
            const VectorXc y = equalizer_output(f, w, 2);
            double m2 = 0.0, m4 = 0.0;
            for (int k = 0; k < y.size(); ++k) {
                const double p = std::norm(y[k]);
                m2 += p;
                m4 += p * p;
            }
            m2 /= y.size();
            m4 /= y.size();
            const VectorXd v = qvec(u);
            worst2 = std::max(worst2, std::abs(v.dot(m.b) - m2) / (1.0 + m2));
            worst4 = std::max(worst4, std::abs(v.dot(m.C * v) - m4) / (1.0 + m4));
        }
        std::ostringstream d;
        d << "second " << worst2 << ", fourth " << worst4;
        check("moment-oracle-equivalence", worst2 <= 1e-10 && worst4 <= 1e-9, d.str());
    }

    {  // SWA equals CMA up to a constant at the matched alpha
        const SignalFrame f = oracle_frame(qpsk, 808);
        const MomentModel m = estimate_moments(f, 2);
        const double alpha = -qstats.R2 * qstats.sigma_s2 / qstats.kurtosis;
        const CostCoefficients swa = swa_cost(m, qstats.sigma_s2, qstats.kurtosis, alpha);
        const CostCoefficients cma = cma_cost(m, qstats.R2);
        Rng rng(44);
        double mean = 0.0, var = 0.0;
        std::vector<double> diffs;
        for (int t = 0; t < 100; ++t) {
            const VectorXd u = random_vec(rng, m.n2);
            diffs.push_back(evaluate_cost(swa, u) - evaluate_cost(cma, u));
            mean += diffs.back();
        }
        mean /= diffs.size();
        for (double v : diffs) var += (v - mean) * (v - mean);
        var /= diffs.size();
        std::ostringstream d;
        d << "offset variance " << var;
        check("swa-constant-offset", var <= 1e-12, d.str());
    }

    {  // training cost vs double-loop direct evaluation
        const SignalFrame f = oracle_frame(qpsk, 909);
        const int L_w = 2, L_t = 6, delay = 3;
        std::vector<cplx> pilots(L_t);
        for (int t = 0; t < L_t; ++t) pilots[t] = f.sources(0, t);
        const CostCoefficients jt = training_cost(f, L_w, pilots, delay);
        Rng rng(55);
        double worst = 0.0;
        for (int t = 0; t < 10; ++t) {
            const VectorXd u = random_vec(rng, 2 * (L_w + 1));
            // direct: sum over usable real pairs
            std::vector<VectorXd> xt;
            std::vector<double> st;
            for (int p = 0; p < L_t; ++p) {
                const int k = p + delay;
                if (k < L_w || k >= f.length()) continue;
                const VectorXc x = build_regressor(f, L_w, k);
                xt.push_back(real_split_r(x));
                st.push_back(pilots[p].real());
                xt.push_back(real_split_i(x));
                st.push_back(pilots[p].imag());
            }
            double direct = 0.0, pairs = 0.0;
            for (std::size_t p = 0; p < xt.size(); ++p)
                for (std::size_t q = p; q < xt.size(); ++q) {
                    const double lhs = u.dot(xt[p]) * u.dot(xt[q]) - st[p] * st[q];
                    direct += lhs * lhs;
                    pairs += 1.0;
                }
            direct /= pairs;
            const double form = evaluate_cost(jt, u);
            worst = std::max(worst, std::abs(form - direct) / (1.0 + std::abs(direct)));
        }
        std::ostringstream d;
        d << "max rel err " << worst;
        check("training-cost-oracle", worst <= 1e-9, d.str());
    }

    {  // gradient vs central finite differences
        const SignalFrame f = oracle_frame(qpsk, 111);
        const MomentModel m = estimate_moments(f, 2);
        const CostCoefficients cma = cma_cost(m, qstats.R2);
        Rng rng(66);
        double worst = 0.0;
        const double h = 1e-5;
        for (int t = 0; t < 5; ++t) {
            VectorXd u = random_vec(rng, m.n2);
            const VectorXd g = cost_gradient(cma, u);
            for (int i = 0; i < m.n2; ++i) {
                VectorXd up = u, dn = u;
                up[i] += h;
                dn[i] -= h;
                const double fd = (evaluate_cost(cma, up) - evaluate_cost(cma, dn)) / (2 * h);
                worst = std::max(worst, std::abs(fd - g[i]) / (1.0 + std::abs(g[i])));
            }
        }
        std::ostringstream d;
        d << "max rel err " << worst;
        check("gradient-finite-difference", worst <= 1e-5, d.str());
    }

    {  // metric scale invariance
        Rng rng(77);
        CombinedResponse cr;
        cr.taps = {{{}, {}}};
        cr.taps[0][0] = {cplx(rng.gaussian(), rng.gaussian()), cplx(rng.gaussian(), 0.2)};
        cr.taps[0][1] = {cplx(0.1, -0.3), cplx(rng.gaussian(), rng.gaussian())};
        const double base = isi_linear(cr, 0);
        CombinedResponse scaled = cr;
        const cplx c(2.5, -1.25);
        for (auto& src : scaled.taps[0])
            for (auto& t : src) t *= c;
        const double after = isi_linear(scaled, 0);
        MatrixXc cm(2, 2);
        cm << cplx(1.0, 0.2), cplx(0.3, 0), cplx(0.1, 0), cplx(-0.8, 0.5);
        const double n0 = ncci_linear(cm, 0);
        const double n1 = ncci_linear(MatrixXc(c * cm), 0);
        std::ostringstream d;
        d << "isi delta " << std::abs(base - after) << ", ncci delta " << std::abs(n0 - n1);
        check("metric-scale-invariance",
              std::abs(base - after) <= 1e-12 * (1 + base) &&
                  std::abs(n0 - n1) <= 1e-12 * (1 + n0),
              d.str());
    }

    {  // analytic circle instance: tau* = 0, extraction lands on the circle
        const SosSdpProblem p = assemble(circle_cost());
        const SdpSolution sol = solve(p);
        bool ok = std::abs(sol.tau) <= 1e-6 && certify(sol, p);
        double f_u = 0.0, norm_u = 0.0;
        if (ok) {
            const MatrixXd V = null_space_basis(sol.G, 1e-6);
            const VectorXd b = svec(MatrixXd::Identity(2, 2));
            const ExtractionResult er = extract_pp2(V, b, 1.0, {});
            f_u = evaluate_cost(circle_cost(), er.u);
            norm_u = er.u.norm();
            ok = std::abs(norm_u - 1.0) <= 1e-4 && f_u <= 1e-6;
        }
        std::ostringstream d;
        d << "tau " << sol.tau << ", |u| " << norm_u << ", f(u) " << f_u;
        check("circle-sdp-extraction", ok, d.str());
    }

    {  // end-to-end identity channel and byte-identical rerun
        ScenarioConfig cfg;
        cfg.scenario = "selfcheck-identity";
        cfg.channel.explicit_taps = make_siso_channel({cplx(1.0, 0.0)});
        cfg.constellation = "qpsk";
        cfg.K = 200;
        cfg.L_w = 1;
        cfg.runs = 2;
        cfg.seed = 4242;
        cfg.algorithms = {{.name = "co-cma", .post = "pp2"}};
        const ScenarioOutput o1 = run_scenario(cfg);
        const ScenarioOutput o2 = run_scenario(cfg);
        const bool identical = csv_string(o1.rows) == csv_string(o2.rows);
        const bool deep = o1.rows.size() == 2 && o1.rows[0].ok &&
                          o1.rows[0].isi_db <= -60.0 && o1.rows[1].isi_db <= -60.0;
        std::ostringstream d;
        d << "isi_db " << (o1.rows.empty() ? 0.0 : o1.rows[0].isi_db)
          << (identical ? ", reruns byte-identical" : ", rerun mismatch");
        check("pipeline-determinism-identity", identical && deep, d.str());
    }

    return results;
}

}  // namespace coeq
