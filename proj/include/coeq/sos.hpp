#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "coeq/costs.hpp"
#include "coeq/types.hpp"

namespace coeq {

/// Size-4 multisets (i <= j <= l <= m) over 0..n2-1 together with their
/// Q-sets: the distinct permutations (i',j',l',m') with i' <= j' and
/// l' <= m', mapped to (row, col) coordinates of the lifted pair index.
/// Every product of two lifted coordinates lands in exactly one multiset.
struct QuarticIndex {
    int n2 = 0;
    std::vector<std::array<int, 4>> multisets;
    std::vector<std::vector<std::pair<int, int>>> q_tuples;  // per multiset: (row, col)
};

QuarticIndex enumerate_quartics(int n2);

/// One linear equality sum_w G(r,c) + tau_coeff * tau = rhs over the
/// symmetric Gram matrix; entries are stored once per unordered position
/// (r <= c) with their total weight.
struct GramEquality {
    struct Entry {
        int r, c;
        double w;
    };
    std::vector<Entry> entries;
    double tau_coeff = 0.0;
    double rhs = 0.0;
    double norm2 = 0.0;  // squared Frobenius norm of the coefficient matrix

    double value(const MatrixXd& G) const;
};

/// Monomial basis of the Gram parameterization. The even basis
/// [qvec(u); 1] is the production path for the fourth-order blind costs
/// (empirically exact there); the full basis [qvec(u); u; 1] also carries
/// the linear block and certifies arbitrary even quartics, serving as the
/// correctness reference in tests.
enum class SosBasis { even, full };

/// max tau s.t. f(u) - tau = utilde' G utilde, G >= 0. Equalities: one per
/// quartic multiset, one per lifted pair (border column), plus, for the
/// full basis, one per cubic multiset and per linear coordinate (all zero),
/// and the corner equality carrying tau. All rows have pairwise disjoint
/// supports.
struct SosSdpProblem {
    int n2 = 0;
    int lifted_dim = 0;   // D
    int linear_block = 0; // 0 (even) or n2 (full)
    int gram_dim = 0;     // D + linear_block + 1
    std::vector<GramEquality> equalities;
    CostCoefficients cost;  // kept for verification
};

SosSdpProblem assemble(const CostCoefficients& cost, SosBasis basis = SosBasis::even);

/// utilde' G utilde at a given u; the basis is inferred from the dimension.
double gram_value(const MatrixXd& G, const VectorXd& u);

struct CertificateReport {
    double max_eq_residual = 0.0;
    double min_eig_G = 0.0;
    double max_pointwise_gap = 0.0;  // max |f(u) - tau - utilde' G utilde| over samples
};

/// Residual checks of a claimed (G, tau), independent of any solve loop.
CertificateReport verify_certificate(const SosSdpProblem& problem, const MatrixXd& G,
                                     double tau, int sample_count,
                                     std::uint64_t seed = 20240901);

/// Self-describing sparse export (triplet lists per equality) for
/// cross-checking against external SDP tools.
void export_problem(const SosSdpProblem& problem, std::ostream& os);

}  // namespace coeq
