#include <cstdio>
#include <iostream>

#include "coeq/acceptance.hpp"

int main() {
    const auto results = coeq::run_acceptance(&std::cout);
    int failed = 0;
    std::cout << "\n";
    for (const auto& r : results) {
        std::printf("criterion %d %-38s %s  [%s]\n", r.id, r.name.c_str(),
                    r.pass ? "PASS" : "FAIL", r.detail.c_str());
        if (!r.pass) ++failed;
    }
    std::printf("\nacceptance: %zu criteria, %d failed\n", results.size(), failed);
    return failed == 0 ? 0 : 1;
}
