#include "coeq/sos.hpp"

#include <algorithm>
#include <map>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "coeq/errors.hpp"
#include "coeq/rng.hpp"

namespace coeq {

QuarticIndex enumerate_quartics(int n2) {
    if (n2 < 1) throw InvalidInput("enumerate_quartics: n2 must be >= 1");
    const LiftedIndexMap map(n2);
    QuarticIndex qi;
    qi.n2 = n2;
    for (int i = 0; i < n2; ++i)
        for (int j = i; j < n2; ++j)
            for (int l = j; l < n2; ++l)
                for (int m = l; m < n2; ++m) {
                    qi.multisets.push_back({i, j, l, m});
                    std::array<int, 4> perm = {i, j, l, m};
                    std::vector<std::pair<int, int>> tuples;
                    do {
                        if (perm[0] <= perm[1] && perm[2] <= perm[3])
                            tuples.emplace_back(map.index_of(perm[0], perm[1]),
                                                map.index_of(perm[2], perm[3]));
                    } while (std::next_permutation(perm.begin(), perm.end()));
                    qi.q_tuples.push_back(std::move(tuples));
                }
    return qi;
}

double GramEquality::value(const MatrixXd& G) const {
    double v = 0.0;
    for (const Entry& e : entries) v += e.w * G(e.r, e.c);
    return v;
}

namespace {

void finalize_norm(GramEquality& eq) {
    eq.norm2 = 0.0;
    for (const auto& e : eq.entries) eq.norm2 += (e.r == e.c) ? e.w * e.w : 0.5 * e.w * e.w;
    eq.norm2 += eq.tau_coeff * eq.tau_coeff;
}

}  // namespace

SosSdpProblem assemble(const CostCoefficients& cost, SosBasis basis) {
    const int d = cost.dim();
    // D = n2(n2+1)/2  =>  n2 from the triangular number
    int n2 = 0;
    while (n2 * (n2 + 1) / 2 < d) ++n2;
    if (n2 * (n2 + 1) / 2 != d) throw InvalidInput("assemble: cost dimension not triangular");
    if (cost.A22.rows() != d || cost.A22.cols() != d)
        throw InvalidInput("assemble: A22 dimension mismatch");

    SosSdpProblem p;
    p.n2 = n2;
    p.lifted_dim = d;
    p.linear_block = basis == SosBasis::full ? n2 : 0;
    p.gram_dim = d + p.linear_block + 1;
    p.cost = cost;
    const int corner = p.gram_dim - 1;
    const LiftedIndexMap map(n2);

    // Quartic equalities: sum over Q of G entries equals the same sum of A22
    // entries. Ordered tuples (a,b) and (b,a) both count, so the weight of an
    // unordered position is the number of ordered tuples hitting it.
    const QuarticIndex qi = enumerate_quartics(n2);
    for (std::size_t s = 0; s < qi.multisets.size(); ++s) {
        std::map<std::pair<int, int>, double> weight;
        for (const auto& [a, b] : qi.q_tuples[s]) {
            auto key = std::minmax(a, b);
            weight[{key.first, key.second}] += 1.0;
        }
        GramEquality eq;
        eq.rhs = 0.0;
        for (const auto& [rc, w] : weight) {
            eq.entries.push_back({rc.first, rc.second, w});
            eq.rhs += w * cost.A22(rc.first, rc.second);
        }
        finalize_norm(eq);
        p.equalities.push_back(std::move(eq));
    }

    if (basis == SosBasis::even) {
        // Pair equalities: border column of the Gram matrix equals A20.
        for (int t = 0; t < d; ++t) {
            GramEquality eq;
            eq.entries.push_back({t, corner, 1.0});
            eq.rhs = cost.A20[t];
            finalize_norm(eq);
            p.equalities.push_back(std::move(eq));
        }
    } else {
        const int lin = d;  // offset of the linear block rows/columns
        // Cubic multisets (a <= b <= c): 2 * sum of G21 entries over the
        // splits ((i,j), k) vanishes since the cost has no odd terms.
        for (int a = 0; a < n2; ++a)
            for (int b = a; b < n2; ++b)
                for (int c = b; c < n2; ++c) {
                    std::map<std::pair<int, int>, double> weight;
                    auto add = [&](int i, int j, int k) {
                        weight[{map.index_of(std::min(i, j), std::max(i, j)), lin + k}] += 2.0;
                    };
                    add(a, b, c);
                    if (b != c) add(a, c, b);
                    if (a != b) add(b, c, a);
                    GramEquality eq;
                    for (const auto& [rc, w] : weight) eq.entries.push_back({rc.first, rc.second, w});
                    eq.rhs = 0.0;
                    finalize_norm(eq);
                    p.equalities.push_back(std::move(eq));
                }
        // Quadratic terms draw from the border column and the linear block:
        // coefficient of u_a u_b is 2 g20[(ab)] + (G11)_{ab} counted once per
        // ordered position.
        for (int t = 0; t < d; ++t) {
            const auto [a, b] = map.pair_of(t);
            GramEquality eq;
            eq.entries.push_back({t, corner, 2.0});
            eq.entries.push_back({lin + a, lin + b, a == b ? 1.0 : 2.0});
            eq.rhs = 2.0 * cost.A20[t];
            finalize_norm(eq);
            p.equalities.push_back(std::move(eq));
        }
        // Linear terms vanish: g10 = 0.
        for (int a = 0; a < n2; ++a) {
            GramEquality eq;
            eq.entries.push_back({lin + a, corner, 1.0});
            eq.rhs = 0.0;
            finalize_norm(eq);
            p.equalities.push_back(std::move(eq));
        }
    }

    // Corner: G00 + tau = A00.
    GramEquality eq;
    eq.entries.push_back({corner, corner, 1.0});
    eq.tau_coeff = 1.0;
    eq.rhs = cost.A00;
    finalize_norm(eq);
    p.equalities.push_back(std::move(eq));
    return p;
}

double gram_value(const MatrixXd& G, const VectorXd& u) {
    const VectorXd v = qvec(u);
    const int d = static_cast<int>(v.size());
    const int linear = static_cast<int>(G.rows()) - d - 1;  // 0 or n2
    if (linear != 0 && linear != u.size())
        throw InvalidInput("gram_value: Gram dimension does not match the basis");
    VectorXd ut(G.rows());
    ut.head(d) = v;
    if (linear > 0) ut.segment(d, linear) = u;
    ut[G.rows() - 1] = 1.0;
    return ut.dot(G * ut);
}

CertificateReport verify_certificate(const SosSdpProblem& problem, const MatrixXd& G,
                                     double tau, int sample_count, std::uint64_t seed) {
    if (G.rows() != problem.gram_dim || G.cols() != problem.gram_dim)
        throw InvalidInput("verify_certificate: Gram dimension mismatch");
    CertificateReport rep;
    for (const auto& eq : problem.equalities) {
        const double r = std::abs(eq.value(G) + eq.tau_coeff * tau - eq.rhs);
        rep.max_eq_residual = std::max(rep.max_eq_residual, r);
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(G);
    rep.min_eig_G = es.eigenvalues()[0];

    Rng rng(seed);
    VectorXd u(problem.n2);
    for (int s = 0; s < sample_count; ++s) {
        for (int i = 0; i < problem.n2; ++i) u[i] = rng.gaussian();
        const double gap =
            std::abs(evaluate_cost(problem.cost, u) - tau - gram_value(G, u));
        rep.max_pointwise_gap = std::max(rep.max_pointwise_gap, gap);
    }
    return rep;
}

void export_problem(const SosSdpProblem& problem, std::ostream& os) {
    os << "# sos-sdp problem, format v1\n";
    os << "# maximize tau subject to the equalities below and G psd\n";
    os << "# equality: eq <id> <nnz> <tau_coeff> <rhs>, then nnz lines 'r c w'\n";
    os << "# each triplet contributes w * G(r,c) with r <= c counted once\n";
    os << "dim_G " << problem.gram_dim << "\n";
    os << "n2 " << problem.n2 << "\n";
    os << "linear_block " << problem.linear_block << "\n";
    os << "equalities " << problem.equalities.size() << "\n";
    os.precision(17);
    for (std::size_t c = 0; c < problem.equalities.size(); ++c) {
        const auto& eq = problem.equalities[c];
        os << "eq " << c << " " << eq.entries.size() << " " << eq.tau_coeff << " "
           << eq.rhs << "\n";
        for (const auto& e : eq.entries) os << e.r << " " << e.c << " " << e.w << "\n";
    }
}

}  // namespace coeq
