#include "coeq/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coeq/errors.hpp"

namespace coeq {

ConstellationStats constellation_stats(const Constellation& c) {
    if (c.points.empty()) throw InvalidInput("constellation_stats: empty alphabet");
    double m2 = 0.0, m4 = 0.0;
    cplx ss = 0.0;  // E[s^2], nonzero for non-circular alphabets such as BPSK
    for (const cplx& s : c.points) {
        const double p = std::norm(s);
        m2 += p;
        m4 += p * p;
        ss += s * s;
    }
    const double n = static_cast<double>(c.points.size());
    m2 /= n;
    m4 /= n;
    ss /= n;
    if (m2 <= 0.0) throw InvalidInput("constellation_stats: zero average power");
    ConstellationStats st;
    st.sigma_s2 = m2;
    st.fourth_moment = m4;
    st.R2 = m4 / m2;
    st.kurtosis = m4 - 2.0 * m2 * m2 - std::norm(ss);
    return st;
}

Constellation make_qpsk() {
    const double a = 1.0 / std::sqrt(2.0);
    return {{{a, a}, {a, -a}, {-a, a}, {-a, -a}}, "QPSK"};
}

Constellation make_16qam() {
    Constellation c;
    c.name = "16QAM";
    const double a = 1.0 / std::sqrt(10.0);  // unit average power
    for (int i : {-3, -1, 1, 3})
        for (int q : {-3, -1, 1, 3}) c.points.push_back({a * i, a * q});
    return c;
}

Constellation make_bpsk() { return {{{1.0, 0.0}, {-1.0, 0.0}}, "BPSK"}; }

Constellation make_constellation(const std::string& name) {
    std::string s;
    for (char ch : name) s.push_back(static_cast<char>(std::tolower(ch)));
    if (s == "qpsk" || s == "4qam" || s == "4-qam") return make_qpsk();
    if (s == "16qam" || s == "16-qam") return make_16qam();
    if (s == "bpsk") return make_bpsk();
    throw InvalidInput("unknown constellation: " + name);
}

cplx nearest_symbol(const Constellation& c, cplx y) {
    if (c.points.empty()) throw InvalidInput("nearest_symbol: empty alphabet");
    cplx best = c.points.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (const cplx& s : c.points) {
        const double d = std::norm(y - s);
        if (d < best_d) {
            best_d = d;
            best = s;
        }
    }
    return best;
}

}  // namespace coeq
