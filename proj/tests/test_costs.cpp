#include <doctest.h>

#include <cmath>

#include "coeq/costs.hpp"
#include "coeq/extraction.hpp"
#include "coeq/errors.hpp"
#include "coeq/rng.hpp"

using namespace coeq;

namespace {

VectorXd random_vec(Rng& rng, int n) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.gaussian();
    return v;
}

struct Setup {
    SignalFrame frame;
    MomentModel moments;
    ConstellationStats stats;
    int L_w;
};

Setup make_setup(const Constellation& cst, std::uint64_t seed, int K = 400, int L_w = 2) {
    Rng rng(seed);
    std::vector<cplx> h(3);
    for (auto& t : h) t = cplx(rng.gaussian(), rng.gaussian()) / std::sqrt(2.0);
    Setup s;
    s.L_w = L_w;
    s.frame = generate_frame(cst, make_siso_channel(h), K, 16.0, mix_seed(seed, 1));
    s.moments = estimate_moments(s.frame, L_w);
    s.stats = constellation_stats(cst);
    return s;
}

// direct statistical evaluation of avg |y|^2 and avg |y|^4
void output_moments(const SignalFrame& frame, const VectorXd& u, int L_w, double& m2,
                    double& m4) {
    const VectorXc y = equalizer_output(frame, u_to_equalizer(u), L_w);
    m2 = 0;
    m4 = 0;
    for (int k = 0; k < y.size(); ++k) {
        const double p = std::norm(y[k]);
        m2 += p;
        m4 += p * p;
    }
    m2 /= y.size();
    m4 /= y.size();
}

}  // namespace

TEST_CASE("cma_cost: trivial values and the filter-and-average oracle") {
    const Setup s = make_setup(make_qpsk(), 42);
    const CostCoefficients cma = cma_cost(s.moments, s.stats.R2);

    SUBCASE("u = 0 gives R2^2") {
        CHECK(evaluate_cost(cma, VectorXd::Zero(s.moments.n2)) ==
              doctest::Approx(s.stats.R2 * s.stats.R2).epsilon(1e-12));
    }
    SUBCASE("identity channel, unit equalizer, noiseless: cost vanishes") {
        const auto id = generate_frame(make_qpsk(), make_siso_channel({{1.0, 0.0}}), 100,
                                       std::numeric_limits<double>::infinity(), 3);
        const MomentModel m0 = estimate_moments(id, 0);
        const CostCoefficients c0 = cma_cost(m0, 1.0);
        VectorXd e1 = VectorXd::Zero(2);
        e1[0] = 1.0;
        CHECK(evaluate_cost(c0, e1) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("random u: matrix form equals avg(|y|^2 - R2)^2") {
        Rng rng(7);
        for (int t = 0; t < 10; ++t) {
            const VectorXd u = random_vec(rng, s.moments.n2);
            double m2, m4;
            output_moments(s.frame, u, s.L_w, m2, m4);
            const double direct = m4 - 2.0 * s.stats.R2 * m2 + s.stats.R2 * s.stats.R2;
            CHECK(evaluate_cost(cma, u) ==
                  doctest::Approx(direct).epsilon(1e-9));
        }
    }
    SUBCASE("bad R2 rejected") { CHECK_THROWS_AS(cma_cost(s.moments, 0.0), InvalidInput); }
}

TEST_CASE("swa_cost: oracle and reduction to CMA at the matched alpha") {
    const Setup s = make_setup(make_qpsk(), 43);
    const double alpha = 0.5;
    const CostCoefficients swa =
        swa_cost(s.moments, s.stats.sigma_s2, s.stats.kurtosis, alpha);

    SUBCASE("u = 0 gives 0") {
        CHECK(evaluate_cost(swa, VectorXd::Zero(s.moments.n2)) == doctest::Approx(0.0));
    }
    SUBCASE("random u: direct statistic") {
        Rng rng(8);
        const double s4 = s.stats.sigma_s2 * s.stats.sigma_s2;
        for (int t = 0; t < 10; ++t) {
            const VectorXd u = random_vec(rng, s.moments.n2);
            double m2, m4;
            output_moments(s.frame, u, s.L_w, m2, m4);
            const double direct = m4 - (2.0 + (1.0 + alpha) * s.stats.kurtosis / s4) * m2 * m2 +
                                  2.0 * alpha * (s.stats.kurtosis / s.stats.sigma_s2) * m2;
            CHECK(evaluate_cost(swa, u) == doctest::Approx(direct).epsilon(1e-9));
        }
    }
    SUBCASE("alpha = -R2 sigma^2 / kurtosis: constant offset -R2^2 from CMA") {
        const double a_star = -s.stats.R2 * s.stats.sigma_s2 / s.stats.kurtosis;
        const CostCoefficients swa_star =
            swa_cost(s.moments, s.stats.sigma_s2, s.stats.kurtosis, a_star);
        const CostCoefficients cma = cma_cost(s.moments, s.stats.R2);
        Rng rng(9);
        for (int t = 0; t < 100; ++t) {
            const VectorXd u = random_vec(rng, s.moments.n2);
            CHECK(evaluate_cost(swa_star, u) - evaluate_cost(cma, u) ==
                  doctest::Approx(-s.stats.R2 * s.stats.R2).epsilon(1e-9));
        }
    }
}

TEST_CASE("med_cost: oracle and trivial values") {
    const Setup s = make_setup(make_16qam(), 44);
    const double lambda_p = 2.0;
    const CostCoefficients med = med_cost(s.moments, s.stats.sigma_s2, lambda_p);

    SUBCASE("u = 0 gives lambda_p sigma^4") {
        CHECK(evaluate_cost(med, VectorXd::Zero(s.moments.n2)) ==
              doctest::Approx(lambda_p * s.stats.sigma_s2 * s.stats.sigma_s2).epsilon(1e-12));
    }
    SUBCASE("lambda_p = 0 leaves the pure fourth moment") {
        const CostCoefficients pure = med_cost(s.moments, s.stats.sigma_s2, 0.0);
        Rng rng(10);
        const VectorXd u = random_vec(rng, s.moments.n2);
        double m2, m4;
        output_moments(s.frame, u, s.L_w, m2, m4);
        CHECK(evaluate_cost(pure, u) == doctest::Approx(m4).epsilon(1e-9));
    }
    SUBCASE("random u at lambda_p = 2") {
        Rng rng(11);
        for (int t = 0; t < 10; ++t) {
            const VectorXd u = random_vec(rng, s.moments.n2);
            double m2, m4;
            output_moments(s.frame, u, s.L_w, m2, m4);
            const double d = m2 - s.stats.sigma_s2;
            CHECK(evaluate_cost(med, u) == doctest::Approx(m4 + lambda_p * d * d).epsilon(1e-9));
        }
    }
    SUBCASE("negative multiplier rejected") {
        CHECK_THROWS_AS(med_cost(s.moments, 1.0, -0.5), InvalidInput);
    }
}

TEST_CASE("cross_corr_penalty: empty, duplicated-stream, and filtering oracle") {
    SUBCASE("no previous equalizers: zero vector") {
        const Setup s = make_setup(make_qpsk(), 45);
        const VectorXd q = cross_corr_penalty({}, s.frame, s.L_w, 2);
        CHECK(q.isZero(0.0));
    }
    SUBCASE("duplicated receive streams, w1 = e1, delta = 0") {
        // both antennas see the same signal, so the lag-0 cross-correlation
        // of stream 1 (e1) with a candidate e1 is (avg |x1|^2)^2
        const auto base = generate_frame(make_qpsk(), make_siso_channel({{0.9, 0.1}, {0.2, 0.0}}),
                                         200, std::numeric_limits<double>::infinity(), 5);
        SignalFrame dup;
        dup.sources = base.sources;
        dup.received.resize(2, base.length());
        dup.received.row(0) = base.received.row(0);
        dup.received.row(1) = base.received.row(0);
        const int N = 2;  // n_rx * (L_w+1) with L_w = 0
        VectorXc w1 = VectorXc::Zero(N);
        w1[0] = 1.0;
        const VectorXd q = cross_corr_penalty({w1}, dup, 0, 0);
        double p2 = 0.0;
        for (int k = 0; k < dup.length(); ++k) p2 += std::norm(dup.received(0, k));
        p2 /= dup.length();
        VectorXd u1 = VectorXd::Zero(2 * N);
        u1[0] = 1.0;
        CHECK(q.dot(qvec(u1)) == doctest::Approx(p2 * p2).epsilon(1e-9));
        CHECK(q.dot(qvec(u1)) > 0.0);
    }
    SUBCASE("random case equals the direct filtering statistic") {
        Rng rng(46);
        ChannelModel ch;
        ch.n_tx = 2;
        ch.n_rx = 2;
        ch.taps.resize(2);
        for (int j = 0; j < 2; ++j) {
            ch.taps[j].resize(2);
            for (int n = 0; n < 2; ++n) {
                ch.taps[j][n] = {cplx(rng.gaussian(), rng.gaussian()) * 0.7,
                                 cplx(rng.gaussian(), rng.gaussian()) * 0.3};
            }
        }
        const int L_w = 1, K = 300, delta = 1;
        const auto frame = generate_frame(make_qpsk(), ch, K, 20.0, 47);
        const int N = ch.n_rx * (L_w + 1);
        VectorXc w1(N), w2(N);
        for (int i = 0; i < N; ++i) {
            w1[i] = cplx(rng.gaussian(), rng.gaussian());
            w2[i] = cplx(rng.gaussian(), rng.gaussian());
        }
        const VectorXd q = cross_corr_penalty({w1, w2}, frame, L_w, delta);
        const VectorXd uj = random_vec(rng, 2 * N);
        const VectorXc wj = u_to_equalizer(uj);

        // direct: sum over prev streams and lags of |avg y_i(k) conj(y_j(k-l))|^2
        double direct = 0.0;
        for (const VectorXc& wi : {w1, w2}) {
            for (int l = -delta; l <= delta; ++l) {
                cplx acc = 0.0;
                int count = 0;
                for (int k = L_w + std::max(0, l); k <= K - 1 + std::min(0, l); ++k) {
                    const cplx yi = wi.dot(build_regressor(frame, L_w, k));
                    const cplx yj = wj.dot(build_regressor(frame, L_w, k - l));
                    acc += yi * std::conj(yj);
                    ++count;
                }
                direct += std::norm(acc / static_cast<double>(count));
            }
        }
        CHECK(q.dot(qvec(uj)) == doctest::Approx(direct).epsilon(1e-9));
    }
    SUBCASE("negative delta rejected") {
        const Setup s = make_setup(make_qpsk(), 48);
        VectorXc w = VectorXc::Ones(s.moments.n2 / 2);
        CHECK_THROWS_AS(cross_corr_penalty({w}, s.frame, s.L_w, -1), InvalidInput);
    }
}

TEST_CASE("training_cost: exact fit, pair count, and the double-loop oracle") {
    SUBCASE("identity channel, unit equalizer, correct delay: zero cost") {
        const auto frame = generate_frame(make_qpsk(), make_siso_channel({{1.0, 0.0}}), 64,
                                          std::numeric_limits<double>::infinity(), 21);
        std::vector<cplx> pilots;
        for (int t = 0; t < 6; ++t) pilots.push_back(frame.sources(0, t));
        const CostCoefficients jt = training_cost(frame, 0, pilots, 0);
        VectorXd u = VectorXd::Zero(2);
        u[0] = 1.0;  // w = 1
        CHECK(evaluate_cost(jt, u) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(evaluate_cost(jt, 2.0 * u) > 1e-3);  // wrong gain no longer fits
    }
    SUBCASE("L_t = 1 yields exactly the three pair terms") {
        // 2 real samples -> pairs (1,1), (1,2), (2,2); verify against a
        // hand-expanded three-term average
        const auto frame = generate_frame(make_16qam(), make_siso_channel({{1.0, 0.0}}), 16,
                                          std::numeric_limits<double>::infinity(), 22);
        std::vector<cplx> pilots = {frame.sources(0, 0)};
        const CostCoefficients jt = training_cost(frame, 0, pilots, 0);
        CHECK(jt.params.at("pair_terms") == 3.0);
        Rng rng(23);
        const VectorXd u = random_vec(rng, 2);
        const VectorXc x = build_regressor(frame, 0, 0);
        const VectorXd xr = real_split_r(x), xi = real_split_i(x);
        const double sr = pilots[0].real(), si = pilots[0].imag();
        const double t11 = u.dot(xr) * u.dot(xr) - sr * sr;
        const double t12 = u.dot(xr) * u.dot(xi) - sr * si;
        const double t22 = u.dot(xi) * u.dot(xi) - si * si;
        CHECK(evaluate_cost(jt, u) ==
              doctest::Approx((t11 * t11 + t12 * t12 + t22 * t22) / 3.0).epsilon(1e-9));
    }
    SUBCASE("random case: double-loop oracle") {
        const Setup s = make_setup(make_16qam(), 49, 300, 2);
        const int L_t = 5, d = 4;
        std::vector<cplx> pilots;
        for (int t = 0; t < L_t; ++t) pilots.push_back(s.frame.sources(0, t));
        const CostCoefficients jt = training_cost(s.frame, s.L_w, pilots, d);
        Rng rng(50);
        for (int t = 0; t < 5; ++t) {
            const VectorXd u = random_vec(rng, s.moments.n2);
            std::vector<VectorXd> xt;
            std::vector<double> st;
            for (int p = 0; p < L_t; ++p) {
                const int k = p + d;
                if (k < s.L_w || k >= s.frame.length()) continue;
                const VectorXc x = build_regressor(s.frame, s.L_w, k);
                xt.push_back(real_split_r(x));
                st.push_back(pilots[p].real());
                xt.push_back(real_split_i(x));
                st.push_back(pilots[p].imag());
            }
            double direct = 0.0;
            double pairs = 0.0;
            for (std::size_t p = 0; p < xt.size(); ++p)
                for (std::size_t q = p; q < xt.size(); ++q) {
                    const double lhs = u.dot(xt[p]) * u.dot(xt[q]) - st[p] * st[q];
                    direct += lhs * lhs;
                    pairs += 1.0;
                }
            CHECK(evaluate_cost(jt, u) == doctest::Approx(direct / pairs).epsilon(1e-9));
        }
    }
    SUBCASE("pilot beyond the frame rejected") {
        const Setup s = make_setup(make_qpsk(), 51, 50, 1);
        std::vector<cplx> pilots(60, cplx(1.0, 0.0));
        CHECK_THROWS_AS(training_cost(s.frame, s.L_w, pilots, 0), InvalidInput);
    }
}

TEST_CASE("combine: weights, identity, and the penalized blind cost") {
    const Setup s = make_setup(make_qpsk(), 52);
    const CostCoefficients cma = cma_cost(s.moments, s.stats.R2);
    Rng rng(53);

    SUBCASE("weight (1, 0) leaves the first cost unchanged") {
        const CostCoefficients zero = med_cost(s.moments, s.stats.sigma_s2, 0.0);
        const CostCoefficients mix = combine({{cma, 1.0}, {zero, 0.0}});
        const VectorXd u = random_vec(rng, s.moments.n2);
        CHECK(evaluate_cost(mix, u) == doctest::Approx(evaluate_cost(cma, u)).epsilon(1e-12));
    }
    SUBCASE("half-half of identical costs is the same cost") {
        const CostCoefficients mix = combine({{cma, 0.5}, {cma, 0.5}});
        const VectorXd u = random_vec(rng, s.moments.n2);
        CHECK(evaluate_cost(mix, u) == doctest::Approx(evaluate_cost(cma, u)).epsilon(1e-12));
    }
    SUBCASE("penalized cost matches the explicit algebraic form") {
        VectorXc w1 = VectorXc::Ones(s.moments.n2 / 2);
        const VectorXd q = cross_corr_penalty({w1}, s.frame, s.L_w, 1);
        const double lambda_cr = 1.0;
        const CostCoefficients bsr = combine({{cma, 1.0}, {penalty_cost(q), lambda_cr}});
        for (int t = 0; t < 10; ++t) {
            const VectorXd u = random_vec(rng, s.moments.n2);
            const VectorXd v = qvec(u);
            const double expected = v.dot(s.moments.C * v) -
                                    (2.0 * s.stats.R2 * s.moments.b - lambda_cr * q).dot(v) +
                                    s.stats.R2 * s.stats.R2;
            CHECK(evaluate_cost(bsr, u) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
    SUBCASE("dimension mismatch rejected") {
        CostCoefficients small;
        small.A22 = MatrixXd::Zero(3, 3);
        small.A20 = VectorXd::Zero(3);
        CHECK_THROWS_AS(combine({{cma, 1.0}, {small, 1.0}}), InvalidInput);
    }
}

TEST_CASE("evaluate_cost_best_scale: closed-form ray minimum") {
    const Setup s = make_setup(make_qpsk(), 54);
    const CostCoefficients cma = cma_cost(s.moments, s.stats.R2);
    Rng rng(55);
    const VectorXd u = random_vec(rng, s.moments.n2);
    const double best = evaluate_cost_best_scale(cma, u);
    for (double g : {0.25, 0.5, 0.9, 1.0, 1.1, 2.0, 4.0})
        CHECK(best <= evaluate_cost(cma, g * u) + 1e-12);
}

TEST_CASE("select_delay: recovers a known shift") {
    const auto frame = generate_frame(make_qpsk(), make_siso_channel({{0.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}}),
                                      100, std::numeric_limits<double>::infinity(), 77);
    std::vector<cplx> pilots;
    for (int t = 0; t < 8; ++t) pilots.push_back(frame.sources(0, t));
    // unit equalizer: y(k) = x(k) = s(k-2), so the pilot correlation peaks at d = 2
    VectorXc w = VectorXc::Zero(1);
    w[0] = cplx(1.0);
    CHECK(select_delay(frame, 0, pilots, w, 4) == 2);
}
