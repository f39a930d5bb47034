#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "coeq/errors.hpp"
#include "coeq/extraction.hpp"
#include "coeq/lifting.hpp"
#include "coeq/rng.hpp"

using namespace coeq;

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

}  // namespace

TEST_CASE("LiftedIndexMap: lexicographic bijection") {
    const LiftedIndexMap map(6);
    CHECK(map.dim() == 21);  // n2(n2+1)/2
    CHECK(map.index_of(0, 0) == 0);
    CHECK(map.index_of(0, 5) == 5);
    CHECK(map.index_of(1, 1) == 6);
    CHECK(map.index_of(5, 5) == 20);
    for (int idx = 0; idx < map.dim(); ++idx) {
        const auto [i, j] = map.pair_of(idx);
        CHECK(i <= j);
        CHECK(map.index_of(i, j) == idx);
    }
}

TEST_CASE("svec: definition and roundtrip") {
    MatrixXd m(2, 2);
    m << 1, 2, 2, 3;
    const VectorXd v = svec(m);
    REQUIRE(v.size() == 3);
    CHECK(v[0] == 1.0);
    CHECK(v[1] == 4.0);  // off-diagonal doubled
    CHECK(v[2] == 3.0);

    CHECK(svec(MatrixXd::Identity(2, 2)) == (VectorXd(3) << 1, 0, 1).finished());

    Rng rng(1);
    const MatrixXd big = random_sym(rng, 12);
    CHECK((svec_inv(svec(big)) - big).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("svec: asymmetric input rejected") {
    MatrixXd m(2, 2);
    m << 1, 2, 2.1, 3;
    CHECK_THROWS_AS(svec(m), InvalidInput);
    CHECK_NOTHROW(svec(m, 0.2));
}

TEST_CASE("qvec: definition and duality with svec") {
    VectorXd u(2);
    u << 1, 2;
    const VectorXd v = qvec(u);
    REQUIRE(v.size() == 3);
    CHECK(v[0] == 1.0);
    CHECK(v[1] == 2.0);
    CHECK(v[2] == 4.0);

    CHECK(qvec(VectorXd::Zero(5)).isZero(0.0));

    // dot(qvec(u), svec(M)) = u'Mu: spec example gives 21
    MatrixXd m(2, 2);
    m << 1, 2, 2, 3;
    CHECK(qvec(u).dot(svec(m)) == doctest::Approx(21.0).epsilon(1e-14));

    Rng rng(2);
    for (int t = 0; t < 20; ++t) {
        const VectorXd x = random_vec(rng, 9);
        const MatrixXd A = random_sym(rng, 9);
        CHECK(qvec(x).dot(svec(A)) ==
              doctest::Approx(x.dot(A * x)).epsilon(1e-12));
    }
}

TEST_CASE("rank1_approx: recovers the generating vector") {
    VectorXd w(2);
    w << 3, 4;
    const auto [u, lambda] = rank1_approx(qvec(w));
    CHECK(lambda == doctest::Approx(25.0).epsilon(1e-12));
    CHECK(std::min((u - w).norm(), (u + w).norm()) <= 1e-12);

    const auto [z, lz] = rank1_approx(VectorXd::Zero(6));
    CHECK(z.isZero(0.0));
    CHECK(lz == 0.0);
}

TEST_CASE("rank1_approx: rank-2 input loses information") {
    VectorXd e1(2), e2(2);
    e1 << 1, 0;
    e2 << 0, 1;
    const VectorXd v = qvec(e1) + qvec(e2);  // identity matrix
    const auto [u, lambda] = rank1_approx(v);
    CHECK(lambda == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(u.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((qvec(u) - v).norm() > 0.1);
}

TEST_CASE("estimate_moments: second and fourth moment oracle") {
    Rng rng(404);
    std::vector<cplx> h(3);
    for (auto& t : h) t = cplx(rng.gaussian(), rng.gaussian()) / std::sqrt(2.0);
    const int L_w = 2, K = 300;
    const auto frame = generate_frame(make_qpsk(), make_siso_channel(h), K, 18.0, 11);
    const MomentModel m = estimate_moments(frame, L_w);
    CHECK(m.sample_count == K - L_w);

    for (int t = 0; t < 10; ++t) {
        const VectorXd u = random_vec(rng, m.n2);
        const VectorXc w = u_to_equalizer(u);
        const VectorXc y = equalizer_output(frame, w, L_w);
        double m2 = 0, m4 = 0;
        for (int k = 0; k < y.size(); ++k) {
            const double p = std::norm(y[k]);
            m2 += p;
            m4 += p * p;
        }
        m2 /= y.size();
        m4 /= y.size();
        const VectorXd v = qvec(u);
        CHECK(v.dot(m.b) == doctest::Approx(m2).epsilon(1e-10));
        CHECK(v.dot(m.C * v) == doctest::Approx(m4).epsilon(1e-9));
    }
}

TEST_CASE("estimate_moments: single-sample hand case") {
    // x(k) = e_1 (real): Xbar = x_r x_r' + x_i x_i' has ones at the two
    // diagonal positions of the real stack (Re and Im part of coordinate 1).
    SignalFrame f;
    f.sources = MatrixXc::Zero(1, 1);
    f.received = MatrixXc::Zero(1, 1);
    f.received(0, 0) = cplx(1.0, 0.0);
    const MomentModel m = estimate_moments(f, 0);
    REQUIRE(m.n2 == 2);
    const MatrixXd Xbar = svec_inv(m.b);  // svec of a single sample
    CHECK(Xbar(0, 0) == doctest::Approx(1.0));
    CHECK(Xbar(1, 1) == doctest::Approx(1.0));
    CHECK(Xbar(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("estimate_moments: no usable samples rejected") {
    SignalFrame f;
    f.sources = MatrixXc::Zero(1, 3);
    f.received = MatrixXc::Zero(1, 3);
    CHECK_THROWS_AS(estimate_moments(f, 3), InvalidInput);
}

TEST_CASE("lifting properties: |y|^2 = u' Xbar u, Xbar psd of rank <= 2") {
    Rng rng(505);
    std::vector<cplx> h = {{0.7, -0.2}, {0.3, 0.4}};
    const int L_w = 3, K = 50;
    const auto frame = generate_frame(make_16qam(), make_siso_channel(h), K, 25.0, 3);
    for (int k = L_w; k < K; k += 7) {
        const VectorXc x = build_regressor(frame, L_w, k);
        const VectorXd xr = real_split_r(x);
        const VectorXd xi = real_split_i(x);
        const MatrixXd Xbar = xr * xr.transpose() + xi * xi.transpose();
        const VectorXd u = random_vec(rng, static_cast<int>(xr.size()));
        const cplx y = u_to_equalizer(u).dot(x);  // w^H x
        CHECK(u.dot(Xbar * u) == doctest::Approx(std::norm(y)).epsilon(1e-10));

        Eigen::SelfAdjointEigenSolver<MatrixXd> es(Xbar);
        CHECK(es.eigenvalues()[0] >= -1e-12);  // psd
        int positive = 0;
        for (int i = 0; i < es.eigenvalues().size(); ++i)
            if (es.eigenvalues()[i] > 1e-9) ++positive;
        CHECK(positive <= 2);  // rank <= 2
    }
}

TEST_CASE("moment vector b: dot(qvec(u), b) is an average output power, never negative") {
    Rng rng(606);
    std::vector<cplx> h = {{0.5, -0.1}, {0.3, 0.2}, {0.1, 0.0}};
    const auto frame = generate_frame(make_16qam(), make_siso_channel(h), 200, 12.0, 8);
    const MomentModel m = estimate_moments(frame, 2);
    for (int t = 0; t < 50; ++t) {
        const VectorXd u = random_vec(rng, m.n2);
        CHECK(qvec(u).dot(m.b) >= 0.0);
    }
}

TEST_CASE("moment matrix C is positive semidefinite") {
    std::vector<cplx> h = {{0.9, 0.0}, {0.2, 0.3}};
    const auto frame = generate_frame(make_qpsk(), make_siso_channel(h), 100, 15.0, 17);
    const MomentModel m = estimate_moments(frame, 2);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m.C);
    CHECK(es.eigenvalues()[0] >= -1e-9);
    CHECK((m.C - m.C.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
}
