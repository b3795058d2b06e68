#pragma once

// A priori families of finite test sets F, seeded deterministically.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "primeavg/arith.hpp"
#include "primeavg/signal.hpp"

namespace primeavg {

// Deterministic 64-bit mixing of a seed with labels (splitmix64 finalizer).
inline std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> labels) {
    auto step = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    std::uint64_t h = step(seed);
    for (auto l : labels) h = step(h ^ l);
    return h;
}

struct SetFamily {
    std::string name;
    std::vector<i64> elements;
};

struct FamilyOptions {
    std::vector<int> random_density_exponents{1, 2, 3, 4};  // Bernoulli densities 2^{-j}
    bool intervals = true;
    bool progressions = true;
    bool single_point = true;
    bool greedy = false;
};

// Bernoulli subset of {n in [0, length) : n = 0 mod spacing}, kept with probability p.
inline std::vector<i64> bernoulli_set(i64 length, i64 spacing, double p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(p);
    std::vector<i64> out;
    for (i64 n = 0; n < length; n += spacing)
        if (coin(rng)) out.push_back(n);
    if (out.empty()) out.push_back(0);
    return out;
}

// F = x0 - (positions of the largest kernel weights), x0 = N - 1: K * 1_F(x0)
// then collects the heaviest weights. The kernel is supported in [1, N).
inline std::vector<i64> greedy_set(const CyclicSignal& k, i64 N, std::size_t count) {
    std::vector<std::pair<double, i64>> weights;
    for (i64 n = 1; n < N; ++n)
        if (k[static_cast<std::size_t>(n)] > 0.0) weights.emplace_back(k[static_cast<std::size_t>(n)], n);
    std::stable_sort(weights.begin(), weights.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    count = std::min(count, weights.size());
    std::vector<i64> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(N - 1 - weights[i].second);
    std::sort(out.begin(), out.end());
    return out;
}

// The a priori families of test sets inside [0, length).
inline std::vector<SetFamily> standard_families(i64 length, const Progression& prog, std::uint64_t seed,
                                                const FamilyOptions& opts, const CyclicSignal* kernel = nullptr) {
    std::vector<SetFamily> out;
    auto iota_set = [](i64 from, i64 to, i64 step) {
        std::vector<i64> v;
        for (i64 n = from; n < to; n += step) v.push_back(n);
        return v;
    };
    if (opts.intervals) {
        out.push_back({"interval_1/8", iota_set(0, std::max<i64>(length / 8, 1), 1)});
        out.push_back({"interval_1/2", iota_set(0, std::max<i64>(length / 2, 1), 1)});
    }
    if (opts.progressions) {
        out.push_back({"progression_1/2", iota_set(0, std::max<i64>(length / 2, 1), prog.y)});
        out.push_back({"random_progression_1/2",
                       bernoulli_set(length, prog.y, 0.5,
                                     mix_seed(seed, {0x70, static_cast<std::uint64_t>(length),
                                                     static_cast<std::uint64_t>(prog.y)}))});
    }
    for (int j : opts.random_density_exponents) {
        out.push_back({"random_2^-" + std::to_string(j),
                       bernoulli_set(length, 1, std::ldexp(1.0, -j),
                                     mix_seed(seed, {0x72, static_cast<std::uint64_t>(j),
                                                     static_cast<std::uint64_t>(length)}))});
    }
    if (opts.single_point) out.push_back({"point", {length / 2}});
    if (opts.greedy) {
        if (kernel == nullptr) throw std::invalid_argument("greedy family needs the averaging kernel");
        const auto count = static_cast<std::size_t>(std::sqrt(static_cast<double>(length)));
        out.push_back({"greedy", greedy_set(*kernel, length, count)});
    }
    return out;
}

}  // namespace primeavg
