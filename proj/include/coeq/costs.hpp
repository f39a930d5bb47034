#pragma once

#include <map>
#include <string>
#include <vector>

#include "coeq/lifting.hpp"
#include "coeq/types.hpp"

namespace coeq {

/// An even quartic in u stored as a quadratic in v = qvec(u):
///   f(u) = v' A22 v + 2 A20' v + A00.
struct CostCoefficients {
    MatrixXd A22;
    VectorXd A20;
    double A00 = 0.0;
    std::string label;
    std::map<std::string, double> params;

    int dim() const { return static_cast<int>(A20.size()); }
};

/// CMA: avg(|y|^2 - R2)^2  ->  (C, -R2 b, R2^2).
CostCoefficients cma_cost(const MomentModel& m, double R2);

/// Shalvi-Weinstein with mixing parameter alpha:
///   A22 = C - (2 + (1+alpha) gamma_s / sigma_s^4) b b',
///   A20 = (alpha gamma_s / sigma_s^2) b, A00 = 0.
/// For alpha = -R2 sigma_s^2 / gamma_s this equals the CMA cost up to a
/// constant.
CostCoefficients swa_cost(const MomentModel& m, double sigma_s2, double kurtosis,
                          double alpha);

/// Minimum entropy deconvolution with power-constraint multiplier lambda_p:
///   avg|y|^4 + lambda_p (avg|y|^2 - sigma_s^2)^2.
CostCoefficients med_cost(const MomentModel& m, double sigma_s2, double lambda_p);

/// Cross-correlation penalty vector q for recovering the next stream after
/// the given equalizers: dot(q, qvec(u)) = sum_i sum_{|l| <= delta}
/// |avg_k y_i(k) y*(k-l)|^2 with sample-average correlations.
VectorXd cross_corr_penalty(const std::vector<VectorXc>& prev, const SignalFrame& frame,
                            int L_w, int delta);

/// The penalty as a CostCoefficients (pure linear-in-v term, A20 = q/2).
CostCoefficients penalty_cost(const VectorXd& q);

/// Fourth-order pilot cost over real-interleaved pilot samples:
///   J_t = avg_{p<=q} (u' x_t(p) x_t(q)' u - s_t(p) s_t(q))^2
/// with pilots at frame positions 0..L_t-1 matched to regressors at decision
/// delay d. Averaging over the pair terms keeps the semiblind blend with the
/// (sample-averaged) blind costs scale-balanced. Pilot positions whose
/// regressor cannot be formed (inside the first L_w samples) are skipped;
/// throws InvalidInput if none remain or a position falls outside the frame.
CostCoefficients training_cost(const SignalFrame& frame, int L_w,
                               const std::vector<cplx>& pilots, int d);

/// Weighted sum of costs sharing one lifted dimension.
CostCoefficients combine(const std::vector<std::pair<CostCoefficients, double>>& costs);

/// f(u) through the quadratic-in-v form.
double evaluate_cost(const CostCoefficients& c, const VectorXd& u);

/// min over g of f(g u), closed form over the ray through u. Blind costs
/// carry an inherent scale ambiguity; this is the scale-resolved cost of a
/// direction (the power-normalized representative scores slightly higher
/// whenever the sample minimizer's output power is off sigma_s^2).
double evaluate_cost_best_scale(const CostCoefficients& c, const VectorXd& u);

/// Picks the decision delay in [0, d_max] whose phase-aligned pilot fit of
/// the equalized output is best (largest normalized pilot correlation).
int select_delay(const SignalFrame& frame, int L_w, const std::vector<cplx>& pilots,
                 const VectorXc& w, int d_max);

}  // namespace coeq
