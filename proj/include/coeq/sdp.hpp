#pragma once

#include "coeq/sos.hpp"
#include "coeq/types.hpp"

namespace coeq {

struct SolverSettings {
    double eps_gap = 1e-7;   ///< relative objective-stability / consensus gap
    double eps_feas = 1e-8;  ///< equality residual (unit-norm rows)
    int max_iters = 50000;
    enum class Method { splitting, interior_point };
    Method method = Method::splitting;

    // splitting internals (fixed schedules keep runs deterministic)
    double over_relaxation = 1.6;
    double objective_weight = 1.0;  ///< final tilt on the corner entry
    int objective_ramp_iters = 200; ///< homotopy: tilt ramps linearly to its final value
    int polish_iters = 2000;        ///< alternating-projection cleanup budget
};

struct SdpSolution {
    double tau = 0.0;
    MatrixXd G;
    int iters = 0;
    double gap = 0.0;       ///< achieved relative gap estimate
    double residual = 0.0;  ///< achieved equality residual (unit-norm rows)
    double min_eig = 0.0;
    enum class Status { optimal, max_iters, infeasible };
    Status status = Status::max_iters;
};

/// Maximizes tau subject to the problem's equalities and G psd.
///
/// The default method alternates an exact projection onto the equality
/// affine set (the rows have disjoint supports, so the projection is a
/// single sweep) with a projection onto the psd cone by eigenvalue
/// clipping, with over-relaxation and a fixed ramp of the objective weight.
/// A feasibility polish runs afterwards so the reported tau comes from a
/// certificate that satisfies the equalities to roundoff. Deterministic
/// given settings.
SdpSolution solve(const SosSdpProblem& problem, const SolverSettings& settings = {});

/// Re-checks the solution invariants (equalities, psd, pointwise identity
/// f(u) - tau = utilde' G utilde) independently of the solve loop.
bool certify(const SdpSolution& sol, const SosSdpProblem& problem,
             const SolverSettings& settings = {});

}  // namespace coeq
