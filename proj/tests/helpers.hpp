#pragma once

#include "kitaev/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace testing {

using kitaev::cplx;

// Largest distance in a greedy nearest-neighbour matching of two multisets.
inline double multiset_distance(std::vector<cplx> a, std::vector<cplx> b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    std::vector<bool> used(b.size(), false);
    double worst = 0.0;
    for (const cplx& z : a) {
        std::size_t best = 0;
        double d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < b.size(); ++j)
            if (!used[j] && std::abs(z - b[j]) < d) d = std::abs(z - b[j]), best = j;
        used[best] = true;
        worst = std::max(worst, d);
    }
    return worst;
}

inline std::vector<cplx> to_vector(const kitaev::CVector& v) { return {v.data(), v.data() + v.size()}; }

inline std::vector<cplx> negated(std::vector<cplx> v) {
    for (auto& z : v) z = -z;
    return v;
}

// Random model over every knob; N in [n_lo, n_hi].
inline kitaev::ModelSpec random_spec(std::mt19937& rng, int n_lo, int n_hi, bool twist = true) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    kitaev::ModelSpec s;
    s.N = std::uniform_int_distribution<int>(n_lo, n_hi)(rng);
    s.mu = 4.0 * u(rng) - 2.0;
    s.t = 0.5 + u(rng);
    s.delta = 2.0 * u(rng) - 1.0;
    s.theta = twist ? 2.0 * std::numbers::pi * u(rng) : 0.0;
    s.gamma = 2.0 * u(rng);
    s.onsite_delta = u(rng);
    switch (std::uniform_int_distribution<int>(0, s.N > 1 ? 2 : 1)(rng)) {
    case 0: s.dissipation = kitaev::DissipationPattern::none(); break;
    case 1: s.dissipation = kitaev::DissipationPattern::all_bonds(); break;
    default:
        s.dissipation = kitaev::DissipationPattern::positional(
            {std::uniform_int_distribution<int>(1, s.N - 1)(rng)});
    }
    return s;
}

}  // namespace testing
