#include "coeq/metrics.hpp"

#include <cmath>

#include "coeq/errors.hpp"

namespace coeq {

double isi_linear(const CombinedResponse& cr, int stream) {
    double total = 0.0, peak = 0.0;
    for (const auto& src : cr.taps.at(stream))
        for (const cplx& c : src) {
            const double e = std::norm(c);
            total += e;
            peak = std::max(peak, e);
        }
    if (peak <= 0.0) throw UndefinedMetric("isi: all-zero combined response");
    return (total - peak) / peak;
}

double sum_isi_linear(const CombinedResponse& cr) {
    double s = 0.0;
    for (std::size_t i = 0; i < cr.taps.size(); ++i) s += isi_linear(cr, static_cast<int>(i));
    return s;
}

double ncci_linear(const MatrixXc& combined, int stream) {
    double total = 0.0, peak = 0.0;
    for (int j = 0; j < combined.cols(); ++j) {
        const double e = std::norm(combined(stream, j));
        total += e;
        peak = std::max(peak, e);
    }
    if (peak <= 0.0) throw UndefinedMetric("ncci: zero row");
    return (total - peak) / peak;
}

double average_ncci_linear(const MatrixXc& combined) {
    double s = 0.0;
    for (int i = 0; i < combined.rows(); ++i) s += ncci_linear(combined, i);
    return s / static_cast<double>(combined.rows());
}

MatrixXc combined_matrix(const CombinedResponse& cr) {
    const int streams = static_cast<int>(cr.taps.size());
    const int sources = static_cast<int>(cr.taps.at(0).size());
    MatrixXc m(streams, sources);
    for (int i = 0; i < streams; ++i)
        for (int n = 0; n < sources; ++n) m(i, n) = cr.taps[i][n][0];
    return m;
}

double ser(const VectorXc& y, int y_offset, const SignalFrame& frame,
           const Constellation& c, const CombinedResponse& cr, int stream) {
    // Dominant tap of the combined response: source, delay, and gain.
    int n_star = 0, k_star = 0;
    double peak = 0.0;
    const auto& rows = cr.taps.at(stream);
    for (int n = 0; n < static_cast<int>(rows.size()); ++n)
        for (int k = 0; k < static_cast<int>(rows[n].size()); ++k) {
            const double e = std::norm(rows[n][k]);
            if (e > peak) {
                peak = e;
                n_star = n;
                k_star = k;
            }
        }
    if (peak <= 0.0) throw UndefinedMetric("ser: all-zero combined response");
    const cplx gain = std::conj(rows[n_star][k_star]);  // y ~ conj(c) * s

    const int K = frame.length();
    long errors = 0, total = 0;
    for (int p = 0; p < y.size(); ++p) {
        const int k_src = y_offset + p - k_star;
        if (k_src < 0 || k_src >= K) continue;
        const cplx decided = nearest_symbol(c, y[p] / gain);
        if (std::abs(decided - frame.sources(n_star, k_src)) > 1e-9) ++errors;
        ++total;
    }
    if (total == 0) throw UndefinedMetric("ser: no overlap after delay alignment");
    return static_cast<double>(errors) / static_cast<double>(total);
}

}  // namespace coeq
