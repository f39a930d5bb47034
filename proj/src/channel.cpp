#include "coeq/channel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "coeq/errors.hpp"
#include "coeq/rng.hpp"

namespace coeq {

ChannelModel make_siso_channel(const std::vector<cplx>& h) {
    ChannelModel ch;
    ch.n_tx = 1;
    ch.n_rx = 1;
    ch.taps = {{h}};
    validate_channel(ch);
    return ch;
}

void validate_channel(const ChannelModel& ch) {
    if (ch.n_tx < 1 || ch.n_rx < 1) throw InvalidInput("channel: need n_tx, n_rx >= 1");
    if (static_cast<int>(ch.taps.size()) != ch.n_rx)
        throw InvalidInput("channel: taps rows != n_rx");
    std::size_t len = 0;
    double energy = 0.0;
    for (const auto& row : ch.taps) {
        if (static_cast<int>(row.size()) != ch.n_tx)
            throw InvalidInput("channel: taps cols != n_tx");
        for (const auto& sub : row) {
            if (sub.empty()) throw InvalidInput("channel: empty sub-channel");
            if (len == 0) len = sub.size();
            if (sub.size() != len) throw InvalidInput("channel: ragged tap lengths");
            for (const cplx& h : sub) energy += std::norm(h);
        }
    }
    if (energy <= 0.0) throw InvalidInput("channel: all taps are zero");
}

VectorXc stacked_equalizer(const EqualizerBank& eq, int stream) {
    if (stream < 0 || stream >= eq.n_streams) throw InvalidInput("stacked_equalizer: bad stream");
    VectorXc w(eq.stacked_len());
    int p = 0;
    for (int j = 0; j < eq.n_rx; ++j)
        for (int l = 0; l <= eq.order; ++l) w[p++] = eq.coeffs[stream][j][l];
    return w;
}

EqualizerBank equalizer_from_stacked(const VectorXc& w, int n_rx, int L_w) {
    const int taps = L_w + 1;
    if (w.size() != static_cast<Eigen::Index>(n_rx) * taps)
        throw InvalidInput("equalizer_from_stacked: length mismatch");
    EqualizerBank eq;
    eq.n_streams = 1;
    eq.n_rx = n_rx;
    eq.order = L_w;
    eq.coeffs.resize(1);
    eq.coeffs[0].resize(n_rx);
    int p = 0;
    for (int j = 0; j < n_rx; ++j) {
        eq.coeffs[0][j].resize(taps);
        for (int l = 0; l < taps; ++l) eq.coeffs[0][j][l] = w[p++];
    }
    return eq;
}

SignalFrame generate_frame(const Constellation& c, const ChannelModel& ch, int K,
                           double snr_db, std::uint64_t seed) {
    validate_channel(ch);
    if (K <= 0) throw InvalidInput("generate_frame: K must be positive");
    const int L_h = ch.order();
    if (K <= L_h) throw InvalidInput("generate_frame: K must exceed the channel order");
    if (c.points.empty()) throw InvalidInput("generate_frame: empty alphabet");

    Rng rng(seed);
    SignalFrame f;
    f.seed = seed;
    f.sources.resize(ch.n_tx, K);
    for (int n = 0; n < ch.n_tx; ++n)
        for (int k = 0; k < K; ++k) f.sources(n, k) = c.points[rng.index(c.points.size())];

    // Noise-free channel output, zero prehistory for k < 0.
    f.received = MatrixXc::Zero(ch.n_rx, K);
    for (int j = 0; j < ch.n_rx; ++j)
        for (int n = 0; n < ch.n_tx; ++n)
            for (int m = 0; m <= L_h; ++m) {
                const cplx h = ch.taps[j][n][m];
                if (h == cplx(0.0)) continue;
                for (int k = m; k < K; ++k) f.received(j, k) += h * f.sources(n, k - m);
            }

    // Per-receive-antenna average signal power sets the noise variance.
    f.noise_variance = 0.0;
    if (std::isfinite(snr_db)) {
        const double sigma_s2 = constellation_stats(c).sigma_s2;
        double p_sum = 0.0;
        for (int j = 0; j < ch.n_rx; ++j) {
            double g = 0.0;
            for (int n = 0; n < ch.n_tx; ++n)
                for (const cplx& h : ch.taps[j][n]) g += std::norm(h);
            p_sum += g * sigma_s2;
        }
        const double p_avg = p_sum / ch.n_rx;
        f.noise_variance = p_avg / from_db(snr_db);
        const double s = std::sqrt(f.noise_variance / 2.0);
        for (int j = 0; j < ch.n_rx; ++j)
            for (int k = 0; k < K; ++k)
                f.received(j, k) += cplx(s * rng.gaussian(), s * rng.gaussian());
    }
    return f;
}

VectorXc build_regressor(const SignalFrame& frame, int L_w, int k) {
    const int K = frame.length();
    if (L_w < 0) throw InvalidInput("build_regressor: negative L_w");
    if (k < L_w || k >= K) throw std::out_of_range("build_regressor: k outside [L_w, K)");
    const int n_rx = frame.n_rx();
    VectorXc x(n_rx * (L_w + 1));
    int p = 0;
    for (int j = 0; j < n_rx; ++j)
        for (int l = 0; l <= L_w; ++l) x[p++] = frame.received(j, k - l);
    return x;
}

VectorXc equalizer_output(const SignalFrame& frame, const VectorXc& w, int L_w) {
    const int K = frame.length();
    const int n_rx = frame.n_rx();
    if (w.size() != static_cast<Eigen::Index>(n_rx) * (L_w + 1))
        throw InvalidInput("equalizer_output: w length mismatch");
    VectorXc y(K - L_w);
    for (int k = L_w; k < K; ++k) {
        cplx acc = 0.0;
        int p = 0;
        for (int j = 0; j < n_rx; ++j)
            for (int l = 0; l <= L_w; ++l) acc += std::conj(w[p++]) * frame.received(j, k - l);
        y[k - L_w] = acc;
    }
    return y;
}

double CombinedResponse::total_energy(int stream) const {
    double e = 0.0;
    for (const auto& src : taps.at(stream))
        for (const cplx& c : src) e += std::norm(c);
    return e;
}

CombinedResponse combined_response(const ChannelModel& ch, const EqualizerBank& eq) {
    validate_channel(ch);
    if (eq.n_rx != ch.n_rx) throw InvalidInput("combined_response: n_rx mismatch");
    const int L_h = ch.order();
    const int L_w = eq.order;
    const int len = L_h + L_w + 1;
    CombinedResponse cr;
    cr.taps.resize(eq.n_streams);
    for (int i = 0; i < eq.n_streams; ++i) {
        cr.taps[i].assign(ch.n_tx, std::vector<cplx>(len, cplx(0.0)));
        for (int n = 0; n < ch.n_tx; ++n)
            for (int j = 0; j < ch.n_rx; ++j)
                for (int l = 0; l <= L_w; ++l)
                    for (int m = 0; m <= L_h; ++m)
                        cr.taps[i][n][l + m] +=
                            eq.coeffs[i][j][l] * std::conj(ch.taps[j][n][m]);
    }
    return cr;
}

}  // namespace coeq
