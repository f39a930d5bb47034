#include "coeq/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "coeq/errors.hpp"
#include "coeq/rng.hpp"

namespace coeq {

namespace {

// Equality system over the Gram matrix with the corner/tau row eliminated
// (tau = A00 - G_corner) and rows rescaled to unit Frobenius norm. The rows
// have pairwise disjoint supports, so projecting onto the affine set is one
// exact sweep.
struct EqualitySystem {
    struct Entry {
        int r, c;
        double w;  // scaled weight, contributes w * G(r,c)
    };
    std::vector<Entry> entries;
    std::vector<int> eq_start;  // size m+1
    std::vector<double> rhs;    // scaled
    int m = 0;
    int dim = 0;       // M
    double scale = 1;  // G_solved = scale * G_internal

    double max_residual(const MatrixXd& G) const {
        double worst = 0.0;
        for (int c = 0; c < m; ++c) {
            double v = 0.0;
            for (int e = eq_start[c]; e < eq_start[c + 1]; ++e)
                v += entries[e].w * G(entries[e].r, entries[e].c);
            worst = std::max(worst, std::abs(v - rhs[c]));
        }
        return worst;
    }

    // Exact projection onto {<K_c, G> = rhs_c for all c}; rows are mutually
    // orthogonal and unit-norm.
    void project(MatrixXd& G) const {
        for (int c = 0; c < m; ++c) {
            double v = 0.0;
            for (int e = eq_start[c]; e < eq_start[c + 1]; ++e)
                v += entries[e].w * G(entries[e].r, entries[e].c);
            const double nu = v - rhs[c];
            if (nu == 0.0) continue;
            for (int e = eq_start[c]; e < eq_start[c + 1]; ++e) {
                const Entry& en = entries[e];
                if (en.r == en.c) {
                    G(en.r, en.r) -= nu * en.w;
                } else {
                    G(en.r, en.c) -= 0.5 * nu * en.w;
                    G(en.c, en.r) -= 0.5 * nu * en.w;
                }
            }
        }
    }
};

EqualitySystem build_system(const SosSdpProblem& problem) {
    EqualitySystem sys;
    sys.dim = problem.gram_dim;
    sys.eq_start.push_back(0);
    std::vector<double> raw_rhs;
    std::set<std::vector<std::tuple<int, int, double>>> seen;  // exact-duplicate filter
    for (const auto& eq : problem.equalities) {
        if (eq.tau_coeff != 0.0) continue;  // corner row defines tau, handled outside
        const double nrm = std::sqrt(eq.norm2);
        if (nrm <= 0.0) continue;
        std::vector<std::tuple<int, int, double>> key;
        key.reserve(eq.entries.size() + 1);
        for (const auto& e : eq.entries) key.emplace_back(e.r, e.c, e.w / nrm);
        key.emplace_back(-1, -1, eq.rhs / nrm);
        if (!seen.insert(key).second) continue;
        for (const auto& e : eq.entries)
            sys.entries.push_back({e.r, e.c, e.w / nrm});
        raw_rhs.push_back(eq.rhs / nrm);
        sys.eq_start.push_back(static_cast<int>(sys.entries.size()));
    }
    sys.m = static_cast<int>(raw_rhs.size());

    // Data scaling: make the right-hand side O(1). The objective selector
    // already has unit norm. tau unscales exactly, so scaling f by a
    // positive constant scales tau by the same constant.
    double mx = 0.0;
    for (double r : raw_rhs) mx = std::max(mx, std::abs(r));
    sys.scale = mx > 1e-12 ? mx : 1.0;
    sys.rhs.resize(sys.m);
    for (int c = 0; c < sys.m; ++c) sys.rhs[c] = raw_rhs[c] / sys.scale;
    return sys;
}

void project_psd(MatrixXd& G, Eigen::SelfAdjointEigenSolver<MatrixXd>& es,
                 double* min_eig = nullptr) {
    es.compute(G);
    const VectorXd& ev = es.eigenvalues();
    if (min_eig) *min_eig = ev[0];
    if (ev[0] >= 0.0) return;
    VectorXd clipped = ev.cwiseMax(0.0);
    G = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
    G = 0.5 * (G + G.transpose());
}

SdpSolution solve_splitting(const SosSdpProblem& problem, const SolverSettings& st) {
    const int M = problem.gram_dim;
    const int corner = M - 1;
    const EqualitySystem sys = build_system(problem);

    MatrixXd X = MatrixXd::Zero(M, M);
    MatrixXd Z = MatrixXd::Zero(M, M);
    MatrixXd U = MatrixXd::Zero(M, M);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es;

    const double alpha = st.over_relaxation;
    const int check_every = 25;
    double tau_prev = std::numeric_limits<double>::quiet_NaN();
    double gap = std::numeric_limits<double>::infinity();
    double res = std::numeric_limits<double>::infinity();
    double consensus = std::numeric_limits<double>::infinity();
    int it = 0;
    bool diverged = false;

    for (it = 1; it <= st.max_iters; ++it) {
        const double tilt =
            st.objective_weight *
            std::min(1.0, static_cast<double>(it) / std::max(1, st.objective_ramp_iters));
        X = Z - U;
        X(corner, corner) -= tilt;  // objective: minimize the corner entry
        sys.project(X);
        const MatrixXd Xhat = alpha * X + (1.0 - alpha) * Z;
        MatrixXd Znew = Xhat + U;
        project_psd(Znew, es);
        U += Xhat - Znew;
        const double dz = (Znew - Z).norm();
        Z = Znew;

        if (it % check_every == 0) {
            const double zn = 1.0 + Z.norm();
            consensus = (X - Z).norm() / zn;
            res = sys.max_residual(Z);
            const double tau_now = problem.cost.A00 - sys.scale * Z(corner, corner);
            const double dtau = std::isnan(tau_prev)
                                    ? std::numeric_limits<double>::infinity()
                                    : std::abs(tau_now - tau_prev) / (1.0 + std::abs(tau_now));
            tau_prev = tau_now;
            gap = std::max(dtau, dz / zn);
            if (consensus <= st.eps_feas * 10.0 && res <= st.eps_feas && gap <= st.eps_gap)
                break;
            if (U.norm() > 1e10) {
                diverged = true;
                break;
            }
        }
    }

    // Feasibility polish: alternate exact affine projection with psd
    // projection from the near-optimal iterate. Any exactly feasible psd
    // point certifies its own tau, so this step turns solver noise into a
    // valid bound without moving the objective.
    MatrixXd P = Z;
    double min_eig = 0.0;
    const double polish_tol = 1e-13 * (1.0 + P.norm());
    for (int p = 0; p < st.polish_iters; ++p) {
        sys.project(P);
        es.compute(P);
        min_eig = es.eigenvalues()[0];
        if (min_eig >= -polish_tol) break;
        VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
        P = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
        P = 0.5 * (P + P.transpose());
    }
    // Final clip keeps the certificate psd; the equality residual it causes
    // is the reported one.
    project_psd(P, es, &min_eig);

    SdpSolution sol;
    sol.G = sys.scale * P;
    sol.tau = problem.cost.A00 - sys.scale * P(corner, corner);
    sol.iters = it;
    sol.residual = sys.max_residual(P);
    sol.gap = gap;
    sol.min_eig = sys.scale * min_eig;
    if (diverged)
        sol.status = SdpSolution::Status::infeasible;
    else if (sol.residual <= st.eps_feas && sol.gap <= st.eps_gap &&
             min_eig >= -10.0 * st.eps_feas)
        sol.status = SdpSolution::Status::optimal;
    else
        sol.status = SdpSolution::Status::max_iters;
    return sol;
}

// Dual barrier method: maximize rhs'y + mu log det(C - sum y_c K_c) over a
// decreasing mu path. Small problems only; serves as an independent second
// method behind the same interface.
SdpSolution solve_interior_point(const SosSdpProblem& problem, const SolverSettings& st) {
    const int M = problem.gram_dim;
    const int corner = M - 1;
    const EqualitySystem sys = build_system(problem);
    const int m = sys.m;

    // Strictly dual-feasible start: choose y so that S has n2+1 on the
    // squared-coordinate diagonal group, 1 on every mixed diagonal and on the
    // paired off-diagonal group, 0 elsewhere. That pattern is representable
    // exactly because each row moves its own disjoint entry group.
    const LiftedIndexMap map(problem.n2);
    VectorXd y = VectorXd::Zero(m);
    MatrixXd S = MatrixXd::Zero(M, M);
    S(corner, corner) = 1.0;  // objective selector, untouched by equalities
    auto apply_y = [&](const VectorXd& yv, MatrixXd& Sout) {
        Sout.setZero();
        Sout(corner, corner) = 1.0;
        for (int c = 0; c < m; ++c) {
            const double yc = yv[c];
            if (yc == 0.0) continue;
            for (int e = sys.eq_start[c]; e < sys.eq_start[c + 1]; ++e) {
                const auto& en = sys.entries[e];
                if (en.r == en.c) {
                    Sout(en.r, en.r) -= yc * en.w;
                } else {
                    Sout(en.r, en.c) -= 0.5 * yc * en.w;
                    Sout(en.c, en.r) -= 0.5 * yc * en.w;
                }
            }
        }
    };
    // Rows with a diagonal entry get a y that lands S on the target pattern;
    // their off-diagonal group members land on the matching value because
    // each row moves its whole entry group together.
    for (int c = 0; c < m; ++c) {
        for (int e = sys.eq_start[c]; e < sys.eq_start[c + 1]; ++e) {
            const auto& en = sys.entries[e];
            if (en.r != en.c || en.r >= problem.lifted_dim) continue;
            const auto [i, j] = map.pair_of(en.r);
            const double target = (i == j) ? static_cast<double>(problem.n2) + 1.0 : 1.0;
            y[c] = -target / en.w;
            break;
        }
    }
    apply_y(y, S);

    Eigen::LLT<MatrixXd> llt(S);
    if (llt.info() != Eigen::Success)
        throw Error("interior_point: initial dual point not strictly feasible");

    VectorXd rhs = Eigen::Map<const VectorXd>(sys.rhs.data(), m);
    double mu = 10.0;
    const double mu_min = std::max(st.eps_gap * 1e-3, 1e-12);
    int total_newton = 0;
    MatrixXd W(M, M), T(M, M), H(m, m);
    VectorXd grad(m);

    while (mu > mu_min && total_newton < st.max_iters) {
        for (int inner = 0; inner < 50; ++inner) {
            ++total_newton;
            W = llt.solve(MatrixXd::Identity(M, M));  // S^{-1}
            // gradient and Hessian of rhs'y + mu logdet S
            for (int c = 0; c < m; ++c) {
                double g = 0.0;
                for (int e = sys.eq_start[c]; e < sys.eq_start[c + 1]; ++e) {
                    const auto& en = sys.entries[e];
                    g += en.w * ((en.r == en.c) ? W(en.r, en.r) : W(en.r, en.c));
                }
                grad[c] = rhs[c] - mu * g;
            }
            for (int c = 0; c < m; ++c) {
                // T = S^{-1} K_c S^{-1}
                T.setZero();
                for (int e = sys.eq_start[c]; e < sys.eq_start[c + 1]; ++e) {
                    const auto& en = sys.entries[e];
                    if (en.r == en.c) {
                        T += en.w * (W.col(en.r) * W.row(en.r));
                    } else {
                        T += (0.5 * en.w) * (W.col(en.r) * W.row(en.c));
                        T += (0.5 * en.w) * (W.col(en.c) * W.row(en.r));
                    }
                }
                for (int dd = 0; dd < m; ++dd) {
                    double h = 0.0;
                    for (int e = sys.eq_start[dd]; e < sys.eq_start[dd + 1]; ++e) {
                        const auto& en = sys.entries[e];
                        h += en.w * ((en.r == en.c) ? T(en.r, en.r) : T(en.r, en.c));
                    }
                    H(c, dd) = mu * h;
                }
            }
            H = 0.5 * (H + H.transpose());
            Eigen::LDLT<MatrixXd> hldlt(H);
            VectorXd dy = hldlt.solve(grad);
            double step = 1.0;
            MatrixXd Strial(M, M);
            Eigen::LLT<MatrixXd> llt_trial;
            for (int bt = 0; bt < 60; ++bt) {
                apply_y(y + step * dy, Strial);
                llt_trial.compute(Strial);
                if (llt_trial.info() == Eigen::Success) break;
                step *= 0.5;
            }
            y += step * dy;
            apply_y(y, S);
            llt.compute(S);
            const double decrement = std::sqrt(std::max(0.0, grad.dot(dy)));
            if (decrement < 1e-10 * (1.0 + std::abs(rhs.dot(y)))) break;
        }
        mu *= 0.2;
    }

    // Primal recovery from the central path: X = mu S^{-1}.
    W = llt.solve(MatrixXd::Identity(M, M));
    MatrixXd X = mu * 5.0 * W;  // mu of the last completed centering
    X = 0.5 * (X + X.transpose());

    SdpSolution sol;
    sol.G = sys.scale * X;
    sol.tau = problem.cost.A00 - sys.scale * X(corner, corner);
    sol.iters = total_newton;
    sol.residual = sys.max_residual(X);
    sol.gap = std::abs(mu) * M / (1.0 + std::abs(sol.tau));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(X);
    sol.min_eig = sys.scale * es.eigenvalues()[0];
    sol.status = (sol.residual <= st.eps_feas * 100 && sol.gap <= st.eps_gap * 100)
                     ? SdpSolution::Status::optimal
                     : SdpSolution::Status::max_iters;
    return sol;
}

}  // namespace

SdpSolution solve(const SosSdpProblem& problem, const SolverSettings& settings) {
    if (settings.eps_gap <= 0.0 || settings.eps_feas <= 0.0 || settings.max_iters < 1)
        throw InvalidInput("solve: bad solver settings");
    if (settings.method == SolverSettings::Method::interior_point)
        return solve_interior_point(problem, settings);
    return solve_splitting(problem, settings);
}

bool certify(const SdpSolution& sol, const SosSdpProblem& problem,
             const SolverSettings& settings) {
    if (sol.G.rows() != problem.gram_dim) return false;
    const CertificateReport rep = verify_certificate(problem, sol.G, sol.tau, 200);
    const double scale = 1.0 + sol.G.cwiseAbs().maxCoeff();
    if (rep.max_eq_residual > 100.0 * settings.eps_feas * scale) return false;
    if (rep.min_eig_G < -10.0 * settings.eps_feas * scale) return false;
    // Pointwise identity f(u) - tau = utilde' G utilde; a tampered tau or a
    // wrong Gram matrix shows up here.
    Rng rng(977);
    VectorXd u(problem.n2);
    for (int s = 0; s < 200; ++s) {
        for (int i = 0; i < problem.n2; ++i) u[i] = rng.gaussian();
        const double f = evaluate_cost(problem.cost, u);
        const double g = gram_value(sol.G, u);
        if (std::abs(f - sol.tau - g) > 1e-5 * (1.0 + std::abs(f) + std::abs(g)))
            return false;
    }
    return true;
}

}  // namespace coeq
