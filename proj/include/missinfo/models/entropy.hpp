#pragma once

#include <cstddef>
#include <vector>

namespace missinfo {

struct EntropyResult {
    std::vector<double> per_family;       // NaN for excluded families
    double global = 0.0;
    std::vector<std::size_t> excluded;    // single-point supports (zero null entropy)
};

// Each family gives P(omega | data, H0) over a finite support whose null is
// uniform. Scores are 1 - E/E0 with base-2 entropies.
EntropyResult entropy_measure(const std::vector<std::vector<double>>& families);

}  // namespace missinfo
