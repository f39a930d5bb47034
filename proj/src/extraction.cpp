#include "coeq/extraction.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "coeq/errors.hpp"
#include "coeq/lifting.hpp"
#include "coeq/rng.hpp"

namespace coeq {

MatrixXd null_space_basis(const MatrixXd& G, double gamma) {
    if (G.rows() != G.cols()) throw InvalidInput("null_space_basis: matrix not square");
    if (gamma <= 0.0) throw InvalidInput("null_space_basis: gamma must be positive");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(G);
    int count = 0;
    while (count < G.rows() && es.eigenvalues()[count] < gamma) ++count;
    if (count == 0)
        throw ExtractionError(ExtractionError::Kind::no_null_space,
                              "null_space_basis: no eigenvalue below threshold; "
                              "no minimizer certificate (consider relaxing gamma)");
    return es.eigenvectors().leftCols(count);
}

namespace {

VectorXd lift(const VectorXd& u) {
    const VectorXd v = qvec(u);
    VectorXd ut(v.size() + 1);
    ut.head(v.size()) = v;
    ut[v.size()] = 1.0;
    return ut;
}

// Distance of a rank-1 lift from the certificate span, relative. The true
// minimizer's lift lies inside span(V); spurious fixed points of the
// projection iteration do not.
double span_residual(const MatrixXd& V, const VectorXd& ut) {
    const VectorXd proj = V * (V.transpose() * ut);
    return (ut - proj).norm() / ut.norm();
}

// Levenberg-damped Gauss-Newton on r(u) = (I - VV') lift(u): pulls a
// candidate exactly onto the rank-1 points of the certificate span. Works
// on the certificate only, never on the cost.
VectorXd refine_in_span(const MatrixXd& V, VectorXd u, int max_iters = 40) {
    const int M = static_cast<int>(V.rows());
    const int n2 = static_cast<int>(u.size());
    auto residual = [&](const VectorXd& uu) -> VectorXd {
        const VectorXd l = lift(uu);
        return l - V * (V.transpose() * l);
    };
    VectorXd r = residual(u);
    double mu = 1e-8;
    MatrixXd J(M, n2);
    for (int it = 0; it < max_iters && r.norm() > 1e-13; ++it) {
        J.setZero();
        int p = 0;
        for (int i = 0; i < n2; ++i)
            for (int j = i; j < n2; ++j, ++p) {
                J(p, i) += u[j];
                J(p, j) += u[i];
            }
        const MatrixXd PJ = J - V * (V.transpose() * J);
        const MatrixXd H = PJ.transpose() * PJ;
        const VectorXd g = PJ.transpose() * r;
        bool accepted = false;
        for (int tries = 0; tries < 25 && !accepted; ++tries) {
            MatrixXd Hd = H;
            Hd.diagonal().array() += mu;
            const VectorXd du = Hd.ldlt().solve(-g);
            const VectorXd u_new = u + du;
            const VectorXd r_new = residual(u_new);
            if (r_new.squaredNorm() < r.squaredNorm()) {
                u = u_new;
                r = r_new;
                mu = std::max(mu * 0.3, 1e-12);
                accepted = true;
            } else {
                mu *= 10.0;
            }
        }
        if (!accepted) break;
    }
    return u;
}

// Minimum-norm element of {v in span(V) : v_last = 1}, a deterministic
// phase-averaged start. Fails when the span has no last-coordinate part.
bool centroid_start(const MatrixXd& V, VectorXd& out) {
    const VectorXd corner_row = V.row(V.rows() - 1).transpose();
    const double nrm2 = corner_row.squaredNorm();
    if (nrm2 < 1e-16) return false;
    out = V * (corner_row / nrm2);
    return true;
}

VectorXd random_lifted(int dim, std::uint64_t seed) {
    Rng rng(seed);
    VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = rng.gaussian();
    return v;
}

struct Candidate {
    VectorXd u;
    int iters = 0;
    double residual = std::numeric_limits<double>::infinity();
    bool valid = false;
};

// All starting iterates, deterministic order: the centroid, each basis
// column, then seeded random lifts.
std::vector<VectorXd> starting_points(const MatrixXd& V, const ExtractionSettings& s) {
    std::vector<VectorXd> starts;
    VectorXd c0;
    if (centroid_start(V, c0)) starts.push_back(c0);
    for (int k = 0; k < V.cols(); ++k) starts.push_back(V.col(k));
    for (int k = 0; k < s.num_starts; ++k)
        starts.push_back(
            random_lifted(static_cast<int>(V.rows()),
                          mix_seed(s.init_seed, static_cast<std::uint64_t>(k))));
    return starts;
}

// Fastest start among the certificate-grade results; falls back to the
// smallest residual when none reaches certificate grade.
template <typename Attempt>
Candidate best_candidate(const MatrixXd& V, const ExtractionSettings& settings,
                         Attempt&& attempt) {
    constexpr double kGood = 1e-7;
    Candidate best, fastest_good;
    for (const VectorXd& s0 : starting_points(V, settings)) {
        const Candidate cand = attempt(s0);
        if (!cand.valid) continue;
        if (cand.residual < best.residual) best = cand;
        if (cand.residual <= kGood &&
            (!fastest_good.valid || cand.iters < fastest_good.iters))
            fastest_good = cand;
    }
    return fastest_good.valid ? fastest_good : best;
}

}  // namespace

ExtractionResult extract_pp1(const MatrixXd& V, const ExtractionSettings& settings) {
    if (V.cols() == 0)
        throw ExtractionError(ExtractionError::Kind::no_null_space, "extract_pp1: empty basis");
    const int M = static_cast<int>(V.rows());
    const int D = M - 1;

    if (V.cols() == 1) {
        // One-dimensional null space: scale the basis vector directly.
        VectorXd v = V.col(0);
        if (std::abs(v[D]) < 1e-12)
            throw ExtractionError(ExtractionError::Kind::division_hazard,
                                  "extract_pp1: last element of the certificate is zero");
        v /= v[D];
        return {rank1_approx(v.head(D)).first, 1};
    }

    // The fixed-point phase only needs to reach the right basin; the
    // Gauss-Newton refinement finishes the job, so hand off early.
    const int fp_cap = std::min(settings.max_iters, 8);
    auto attempt = [&](VectorXd ut) -> Candidate {
        Candidate cand;
        VectorXd u;
        for (int it = 1; it <= fp_cap; ++it) {
            VectorXd proj = V * (V.transpose() * ut);
            if (std::abs(proj[D]) < 1e-12) return cand;  // division hazard, drop this start
            proj /= proj[D];
            u = rank1_approx(proj.head(D)).first;
            VectorXd next = lift(u);
            const double delta = (next - ut).norm();
            ut = next;
            cand.iters = it;
            if (delta <= settings.conv_tol) break;
        }
        u = refine_in_span(V, u);
        cand.u = u;
        cand.residual = span_residual(V, lift(u));
        cand.valid = true;
        return cand;
    };

    const Candidate best = best_candidate(V, settings, attempt);
    if (!best.valid)
        throw ExtractionError(ExtractionError::Kind::division_hazard,
                              "extract_pp1: every start projected to a zero last element");
    return {best.u, best.iters};
}

ExtractionResult extract_pp2(const MatrixXd& V, const VectorXd& b, double sigma_s2,
                             const ExtractionSettings& settings) {
    if (V.cols() == 0)
        throw ExtractionError(ExtractionError::Kind::no_null_space, "extract_pp2: empty basis");
    const int M = static_cast<int>(V.rows());
    const int D = M - 1;
    if (b.size() != D) throw InvalidInput("extract_pp2: moment vector length mismatch");
    if (sigma_s2 <= 0.0) throw InvalidInput("extract_pp2: sigma_s2 must be positive");
    const int n2 = static_cast<int>(std::lround((std::sqrt(8.0 * D + 1.0) - 1.0) / 2.0));

    auto power_gain = [&](const VectorXd& u) -> double {
        const double power = qvec(u).dot(b);
        return power > 0.0 ? std::sqrt(sigma_s2 / power) : -1.0;
    };

    if (V.cols() == 1) {
        // Eigenvector sign is arbitrary; the squared-coordinate trace of the
        // stored head decides the flip before the rank-1 step.
        VectorXd head = V.col(0).head(D);
        double trace = 0.0;
        int p = 0;
        for (int i = 0; i < n2; ++i) {
            trace += head[p];
            p += n2 - i;
        }
        if (trace < 0.0) head = -head;
        const VectorXd u = rank1_approx(head).first;
        const double g = power_gain(u);
        if (g <= 0.0)
            throw ExtractionError(ExtractionError::Kind::degenerate_power,
                                  "extract_pp2: nonpositive output power");
        return {g * u, 1};
    }

    const int fp_cap = std::min(settings.max_iters, 8);
    auto attempt = [&](VectorXd ut) -> Candidate {
        Candidate cand;
        VectorXd u;
        for (int it = 1; it <= fp_cap; ++it) {
            const VectorXd proj = V * (V.transpose() * ut);
            u = rank1_approx(proj.head(D)).first;
            const double g = power_gain(u);
            if (g <= 0.0) return cand;  // degenerate power, drop this start
            u *= g;
            VectorXd next = lift(u);
            const double delta = (next - ut).norm();
            ut = next;
            cand.iters = it;
            if (delta <= settings.conv_tol) break;
        }
        u = refine_in_span(V, u);
        cand.u = u;
        cand.residual = span_residual(V, lift(u));
        cand.valid = true;
        return cand;
    };

    const Candidate best = best_candidate(V, settings, attempt);
    if (!best.valid)
        throw ExtractionError(ExtractionError::Kind::degenerate_power,
                              "extract_pp2: every start hit nonpositive output power");
    const double g = power_gain(best.u);
    if (g <= 0.0)
        throw ExtractionError(ExtractionError::Kind::degenerate_power,
                              "extract_pp2: refined output has nonpositive power");
    return {g * best.u, best.iters};
}

VectorXc u_to_equalizer(const VectorXd& u) {
    const int n2 = static_cast<int>(u.size());
    if (n2 % 2 != 0) throw InvalidInput("u_to_equalizer: odd length");
    const int n = n2 / 2;
    VectorXc w(n);
    for (int i = 0; i < n; ++i) w[i] = cplx(u[i], u[n + i]);
    return w;
}

}  // namespace coeq
