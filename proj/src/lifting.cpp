#include "coeq/lifting.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "coeq/errors.hpp"

namespace coeq {

LiftedIndexMap::LiftedIndexMap(int n2) : n2_(n2) {
    if (n2 < 1) throw InvalidInput("LiftedIndexMap: n2 must be >= 1");
    dim_ = n2 * (n2 + 1) / 2;
    row_offset_.resize(n2);
    pairs_.reserve(dim_);
    int off = 0;
    for (int i = 0; i < n2; ++i) {
        row_offset_[i] = off;
        for (int j = i; j < n2; ++j) pairs_.emplace_back(i, j);
        off += n2 - i;
    }
}

int LiftedIndexMap::index_of(int i, int j) const {
    return row_offset_[i] + (j - i);
}

std::pair<int, int> LiftedIndexMap::pair_of(int idx) const {
    return pairs_[idx];
}

VectorXd svec(const MatrixXd& M, double tol) {
    const int n = static_cast<int>(M.rows());
    if (M.cols() != n) throw InvalidInput("svec: matrix not square");
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > tol)
        throw InvalidInput("svec: matrix not symmetric within tolerance");
    VectorXd v(n * (n + 1) / 2);
    int p = 0;
    for (int i = 0; i < n; ++i) {
        v[p++] = M(i, i);
        for (int j = i + 1; j < n; ++j) v[p++] = 2.0 * M(i, j);
    }
    return v;
}

MatrixXd svec_inv(const VectorXd& v) {
    // D = n(n+1)/2  =>  n = (sqrt(8D+1)-1)/2
    const int d = static_cast<int>(v.size());
    const int n = static_cast<int>(std::lround((std::sqrt(8.0 * d + 1.0) - 1.0) / 2.0));
    if (n * (n + 1) / 2 != d) throw InvalidInput("svec_inv: length is not triangular");
    MatrixXd M(n, n);
    int p = 0;
    for (int i = 0; i < n; ++i) {
        M(i, i) = v[p++];
        for (int j = i + 1; j < n; ++j) {
            M(i, j) = M(j, i) = 0.5 * v[p++];
        }
    }
    return M;
}

VectorXd qvec(const VectorXd& u) {
    const int n = static_cast<int>(u.size());
    VectorXd v(n * (n + 1) / 2);
    int p = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) v[p++] = u[i] * u[j];
    return v;
}

std::pair<VectorXd, double> rank1_approx(const VectorXd& v) {
    const int d = static_cast<int>(v.size());
    const int n = static_cast<int>(std::lround((std::sqrt(8.0 * d + 1.0) - 1.0) / 2.0));
    if (n * (n + 1) / 2 != d) throw InvalidInput("rank1_approx: length is not triangular");
    MatrixXd U(n, n);
    int p = 0;
    for (int i = 0; i < n; ++i) {
        U(i, i) = v[p++];
        for (int j = i + 1; j < n; ++j) {
            U(i, j) = U(j, i) = v[p++];  // qvec stores raw products
        }
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(U);
    const double lambda = es.eigenvalues()[n - 1];  // largest
    VectorXd u = std::sqrt(std::max(lambda, 0.0)) * es.eigenvectors().col(n - 1);
    // Deterministic sign: largest-magnitude entry positive.
    int imax = 0;
    for (int i = 1; i < n; ++i)
        if (std::abs(u[i]) > std::abs(u[imax])) imax = i;
    if (u[imax] < 0.0) u = -u;
    return {u, lambda};
}

VectorXd real_split_r(const VectorXc& x) {
    const int n = static_cast<int>(x.size());
    VectorXd r(2 * n);
    for (int i = 0; i < n; ++i) {
        r[i] = x[i].real();
        r[n + i] = x[i].imag();
    }
    return r;
}

VectorXd real_split_i(const VectorXc& x) {
    const int n = static_cast<int>(x.size());
    VectorXd r(2 * n);
    for (int i = 0; i < n; ++i) {
        r[i] = x[i].imag();
        r[n + i] = -x[i].real();
    }
    return r;
}

VectorXd equalizer_to_u(const VectorXc& w) {
    const int n = static_cast<int>(w.size());
    VectorXd u(2 * n);
    for (int i = 0; i < n; ++i) {
        u[i] = w[i].real();
        u[n + i] = w[i].imag();
    }
    return u;
}

namespace {

// svec of x_r x_r' + x_i x_i' without forming the matrix.
void accumulate_svec_outer(const VectorXd& xr, const VectorXd& xi, VectorXd& out) {
    const int n = static_cast<int>(xr.size());
    int p = 0;
    for (int i = 0; i < n; ++i) {
        out[p++] = xr[i] * xr[i] + xi[i] * xi[i];
        for (int j = i + 1; j < n; ++j) out[p++] = 2.0 * (xr[i] * xr[j] + xi[i] * xi[j]);
    }
}

}  // namespace

MomentModel estimate_moments(const SignalFrame& frame, int L_w) {
    const int K = frame.length();
    const int k_eff = K - L_w;
    if (k_eff < 1) throw InvalidInput("estimate_moments: no usable samples (K <= L_w)");
    const int n2 = 2 * frame.n_rx() * (L_w + 1);
    const int d = n2 * (n2 + 1) / 2;

    MomentModel m;
    m.n2 = n2;
    m.sample_count = k_eff;
    m.b = VectorXd::Zero(d);
    m.C = MatrixXd::Zero(d, d);
    VectorXd s(d);
    for (int k = L_w; k < K; ++k) {
        const VectorXc x = build_regressor(frame, L_w, k);
        accumulate_svec_outer(real_split_r(x), real_split_i(x), s);
        m.b += s;
        m.C.selfadjointView<Eigen::Lower>().rankUpdate(s);
    }
    m.b /= static_cast<double>(k_eff);
    m.C /= static_cast<double>(k_eff);
    m.C = m.C.selfadjointView<Eigen::Lower>();
    return m;
}

}  // namespace coeq
