#pragma once

#include "oagfork/rational.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace oagfork {

struct DloSets {
    std::vector<Rational> A, B, C;
};

struct DloVerdict {
    bool independent = true;
    std::optional<std::pair<Rational, Rational>> witness;  // [b₁, b₂]
};

// Dependent iff some closed bounded interval with ends in A ∪ B meets C but misses A.
inline DloVerdict forking_independent_dlo(const DloSets& s) {
    std::vector<Rational> ends = s.A;
    ends.insert(ends.end(), s.B.begin(), s.B.end());
    std::sort(ends.begin(), ends.end());
    ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
    auto hits = [](const std::vector<Rational>& xs, const Rational& lo, const Rational& hi) {
        return std::any_of(xs.begin(), xs.end(), [&](const Rational& x) { return lo <= x && x <= hi; });
    };
    // tightest interval around each c: nearest ends on either side
    for (const auto& c : s.C) {
        auto hi = std::lower_bound(ends.begin(), ends.end(), c);
        if (hi == ends.end()) continue;
        if (*hi == c) {
            if (!hits(s.A, c, c)) return {false, std::make_pair(c, c)};
            continue;
        }
        if (hi == ends.begin()) continue;
        const Rational& lo = *std::prev(hi);
        if (!hits(s.A, lo, *hi)) return {false, std::make_pair(lo, *hi)};
    }
    return {};
}

enum class DloExtension { LeftGeneric, RightGeneric, Realized };

inline const char* dlo_extension_name(DloExtension e) {
    switch (e) {
        case DloExtension::LeftGeneric: return "left-generic";
        case DloExtension::RightGeneric: return "right-generic";
        case DloExtension::Realized: return "realized";
    }
    return "?";
}

inline std::vector<DloExtension> generic_extensions(const Rational& c, const std::vector<Rational>& A) {
    if (std::find(A.begin(), A.end(), c) != A.end()) return {DloExtension::Realized};
    return {DloExtension::LeftGeneric, DloExtension::RightGeneric};
}

}  // namespace oagfork
