#pragma once

#include <utility>
#include <vector>

#include "coeq/channel.hpp"
#include "coeq/types.hpp"

namespace coeq {

/// Bijection between pair indices (i <= j) of R^{2N} and coordinates of the
/// lifted space R^D, D = N(2N+1), in lexicographic order
/// (0,0),(0,1),...,(0,2N-1),(1,1),...,(2N-1,2N-1). All modules share one map
/// so the orderings can never drift apart.
class LiftedIndexMap {
  public:
    explicit LiftedIndexMap(int n2);

    int n2() const { return n2_; }
    int dim() const { return dim_; }  // D = n2(n2+1)/2

    int index_of(int i, int j) const;                 // requires i <= j
    std::pair<int, int> pair_of(int idx) const;

  private:
    int n2_;
    int dim_;
    std::vector<int> row_offset_;
    std::vector<std::pair<int, int>> pairs_;
};

/// svec: diagonal entries copied, off-diagonals doubled, lexicographic order.
/// Throws InvalidInput if M is asymmetric beyond tol.
VectorXd svec(const MatrixXd& M, double tol = 1e-9);

/// Inverse of svec (off-diagonals halved back).
MatrixXd svec_inv(const VectorXd& v);

/// qvec: raw products u_i u_j, i <= j. Key identity:
/// dot(qvec(u), svec(M)) == u' M u.
VectorXd qvec(const VectorXd& u);

/// Rank-1 approximation of the symmetric matrix behind v (qvec storage, raw
/// products): returns u = sqrt(max(lambda,0)) * top eigenvector and the top
/// eigenvalue. Sign is fixed so the largest-magnitude entry of u is positive.
/// If v == qvec(w) exactly, u == +/- w.
std::pair<VectorXd, double> rank1_approx(const VectorXd& v);

/// Sample-average moment structures of the lifted regressors:
///   b = avg_k svec(Xbar_k),   C = avg_k svec(Xbar_k) svec(Xbar_k)',
/// where Xbar_k = x_r x_r' + x_i x_i' and x_r = [Re x; Im x],
/// x_i = [Im x; -Re x]. For any u: dot(qvec(u), b) = avg |y(k)|^2 and
/// qvec(u)' C qvec(u) = avg |y(k)|^4 with y = w^H x.
struct MomentModel {
    int n2 = 0;
    int sample_count = 0;  // K_eff = K - L_w
    VectorXd b;
    MatrixXd C;
};

MomentModel estimate_moments(const SignalFrame& frame, int L_w);

/// Real split of a complex regressor: x_r = [Re x; Im x].
VectorXd real_split_r(const VectorXc& x);
/// Real split of a complex regressor: x_i = [Im x; -Re x].
VectorXd real_split_i(const VectorXc& x);

/// Real parameter vector u = [Re w; Im w] of a stacked complex equalizer.
VectorXd equalizer_to_u(const VectorXc& w);

}  // namespace coeq
