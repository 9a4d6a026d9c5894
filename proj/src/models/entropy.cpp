#include "missinfo/models/entropy.hpp"

#include "missinfo/errors.hpp"

#include <cmath>
#include <string>

namespace missinfo {

EntropyResult entropy_measure(const std::vector<std::vector<double>>& families) {
    EntropyResult r;
    double e_sum = 0.0, e0_sum = 0.0;
    for (std::size_t i = 0; i < families.size(); ++i) {
        const auto& p = families[i];
        double s = 0.0;
        for (double x : p) {
            if (!(x >= 0.0)) throw ValidationError("entropy: family " + std::to_string(i) + " has a negative probability");
            s += x;
        }
        if (p.empty() || std::abs(s - 1.0) > 1e-12)
            throw ValidationError("entropy: family " + std::to_string(i) + " does not sum to 1");
        if (p.size() < 2) {
            r.excluded.push_back(i);
            r.per_family.push_back(std::nan(""));
            continue;
        }
        double e = 0.0;
        for (double x : p)
            if (x > 0) e -= x * std::log2(x);
        double e0 = std::log2(static_cast<double>(p.size()));
        r.per_family.push_back(1.0 - e / e0);
        e_sum += e;
        e0_sum += e0;
    }
    if (e0_sum == 0.0) throw ValidationError("entropy: no family with more than one state");
    r.global = 1.0 - e_sum / e0_sum;
    return r;
}

}  // namespace missinfo
