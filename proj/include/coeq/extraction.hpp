#pragma once

#include <cstdint>

#include "coeq/types.hpp"

namespace coeq {

struct ExtractionSettings {
    double gamma = 1e-7;     ///< eigenvalue threshold for the null space
    int max_iters = 50;
    double conv_tol = 1e-9;  ///< iterate-change tolerance
    std::uint64_t init_seed = 1;
    int num_starts = 8;  ///< random restarts; the result whose rank-1 lift
                         ///< sits closest to the certificate span wins
};

/// Orthonormal eigenvectors of G with eigenvalue below gamma. Throws
/// ExtractionError(no_null_space) when none qualify; callers may relax gamma.
MatrixXd null_space_basis(const MatrixXd& G, double gamma);

struct ExtractionResult {
    VectorXd u;
    int iters = 0;
};

/// Projection / normalize-last-entry / rank-1 iteration. Fails with
/// ExtractionError(division_hazard) when the last entry of an iterate
/// vanishes.
ExtractionResult extract_pp1(const MatrixXd& V, const ExtractionSettings& settings);

/// Projection / rank-1 / power-rescale iteration: the output is scaled so
/// that dot(qvec(u), b) equals sigma_s2, avoiding the division by the last
/// entry. Fails with ExtractionError(degenerate_power) when the projected
/// power is nonpositive.
ExtractionResult extract_pp2(const MatrixXd& V, const VectorXd& b, double sigma_s2,
                             const ExtractionSettings& settings);

/// u = [Re(w); Im(w)] back to the complex equalizer.
VectorXc u_to_equalizer(const VectorXd& u);

}  // namespace coeq
