#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "semcont/errors.hpp"
#include "semcont/saliency.hpp"

namespace semcont {

enum class DistanceKind { msd, wasserstein1 };

inline std::string to_string(DistanceKind k) {
    return k == DistanceKind::msd ? "msd" : "wasserstein1";
}

inline DistanceKind distance_kind_from_string(const std::string& s) {
    if (s == "msd") return DistanceKind::msd;
    if (s == "wasserstein1") return DistanceKind::wasserstein1;
    throw config_error("unknown distance kind '" + s + "' (known: msd, wasserstein1)");
}

// Mean squared per-pixel deviation. Callers normalize maps first.
inline double msd(const SaliencyMap& a, const SaliencyMap& b) {
    if (a.width != b.width || a.height != b.height)
        throw data_error("msd: dimension mismatch (" + std::to_string(a.width) + "x" +
                         std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                         std::to_string(b.height) + ")");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double d = static_cast<double>(a.values[i]) - static_cast<double>(b.values[i]);
        acc += d * d;
    }
    return a.values.empty() ? 0.0 : acc / static_cast<double>(a.values.size());
}

// First Wasserstein distance between the empirical distributions of the
// flattened pixel values; with equal counts this is the mean absolute
// difference of the sorted sequences.
inline double wasserstein1(const SaliencyMap& a, const SaliencyMap& b) {
    if (a.values.size() != b.values.size())
        throw data_error("wasserstein1: pixel count mismatch (" +
                         std::to_string(a.values.size()) + " vs " +
                         std::to_string(b.values.size()) + ")");
    if (a.values.empty()) return 0.0;
    std::vector<double> va(a.values.begin(), a.values.end());
    std::vector<double> vb(b.values.begin(), b.values.end());
    std::sort(va.begin(), va.end());
    std::sort(vb.begin(), vb.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) acc += std::abs(va[i] - vb[i]);
    return acc / static_cast<double>(va.size());
}

inline double saliency_distance(DistanceKind kind, const SaliencyMap& a, const SaliencyMap& b) {
    return kind == DistanceKind::msd ? msd(a, b) : wasserstein1(a, b);
}

}  // namespace semcont
