#pragma once

#include <string>
#include <vector>

#include "coeq/types.hpp"

namespace coeq {

/// Moments of a symbol alphabet under the uniform distribution.
struct ConstellationStats {
    double sigma_s2;       ///< E|s|^2
    double fourth_moment;  ///< E|s|^4
    double R2;             ///< E|s|^4 / E|s|^2 (CMA dispersion constant)
    double kurtosis;       ///< E|s|^4 - 2(E|s|^2)^2 - |E[s^2]|^2
};

/// Finite complex symbol alphabet.
struct Constellation {
    std::vector<cplx> points;
    std::string name;
};

/// Exact moments by enumeration over the alphabet (symbols equiprobable).
/// Throws InvalidInput on an empty alphabet.
ConstellationStats constellation_stats(const Constellation& c);

/// Unit-power alphabets.
Constellation make_qpsk();
Constellation make_16qam();
Constellation make_bpsk();

/// Lookup by name ("qpsk", "16qam", "bpsk"); throws InvalidInput otherwise.
Constellation make_constellation(const std::string& name);

/// Nearest alphabet point to y.
cplx nearest_symbol(const Constellation& c, cplx y);

}  // namespace coeq
