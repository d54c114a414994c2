#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "semcont/errors.hpp"

namespace semcont {

inline constexpr double kSignificanceAlpha = 0.05;

enum class CorrMethod { pearson, spearman, kendall };

inline std::string to_string(CorrMethod m) {
    switch (m) {
        case CorrMethod::pearson: return "pearson";
        case CorrMethod::spearman: return "spearman";
        case CorrMethod::kendall: return "kendall";
    }
    return "?";
}

struct CorrelationResult {
    CorrMethod method = CorrMethod::pearson;
    double coefficient = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
    bool significant = false;
};

namespace stats_detail {

inline void check_pair(const std::vector<double>& x, const std::vector<double>& y,
                       const char* op) {
    if (x.size() != y.size())
        throw data_error(std::string(op) + ": length mismatch (" + std::to_string(x.size()) +
                         " vs " + std::to_string(y.size()) + ")");
    if (x.size() < 3)
        throw data_error(std::string(op) + ": need at least 3 samples, got " +
                         std::to_string(x.size()));
    for (double v : x)
        if (!std::isfinite(v)) throw numeric_error(std::string(op) + ": non-finite value in x");
    for (double v : y)
        if (!std::isfinite(v)) throw numeric_error(std::string(op) + ": non-finite value in y");
    auto constant = [](const std::vector<double>& v) {
        for (double u : v)
            if (u != v.front()) return false;
        return true;
    };
    if (constant(x)) throw constant_input_error(std::string(op) + ": x is constant");
    if (constant(y)) throw constant_input_error(std::string(op) + ": y is constant");
}

// Two-sided p for t against Student-t with df degrees of freedom.
inline double student_t_two_sided(double t, double df) {
    boost::math::students_t_distribution<double> dist(df);
    return 2.0 * boost::math::cdf(dist, -std::abs(t));
}

inline double normal_two_sided(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

inline double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline CorrelationResult r_with_t_test(CorrMethod method, double r, std::size_t n) {
    CorrelationResult res;
    res.method = method;
    res.coefficient = r;
    res.n = n;
    const double one_minus_r2 = 1.0 - r * r;
    if (one_minus_r2 <= 0.0) {
        res.p_value = 0.0;
    } else {
        const double t = r * std::sqrt(static_cast<double>(n - 2) / one_minus_r2);
        res.p_value = student_t_two_sided(t, static_cast<double>(n - 2));
    }
    res.significant = res.p_value < kSignificanceAlpha;
    return res;
}

// Mergesort-based inversion count on y after sorting by (x, y): the number of
// discordant pairs among pairs not tied in x.
inline std::uint64_t merge_count(std::vector<double>& v, std::vector<double>& buf,
                                 std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t inv = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            inv += mid - i;
            buf[k++] = v[j++];
        } else {
            buf[k++] = v[i++];
        }
    }
    while (i < mid) buf[k++] = v[i++];
    while (j < hi) buf[k++] = v[j++];
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
              buf.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return inv;
}

struct TieCounts {
    // Over tied groups of size t: sum t(t-1)/2, sum t(t-1)(t-2), sum t(t-1)(2t+5).
    double pairs = 0.0, triple = 0.0, weighted = 0.0;
};

inline TieCounts tie_counts(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    TieCounts c;
    std::size_t i = 0;
    while (i < v.size()) {
        std::size_t j = i;
        while (j < v.size() && v[j] == v[i]) ++j;
        const double t = static_cast<double>(j - i);
        c.pairs += t * (t - 1.0) / 2.0;
        c.triple += t * (t - 1.0) * (t - 2.0);
        c.weighted += t * (t - 1.0) * (2.0 * t + 5.0);
        i = j;
    }
    return c;
}

// Signed concordant-minus-discordant pair count by direct O(n^2) counting.
inline long long pair_statistic(const std::vector<double>& x, const std::vector<double>& y) {
    long long s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            const double a = (x[i] - x[j]) * (y[i] - y[j]);
            if (a > 0) ++s;
            else if (a < 0) --s;
        }
    }
    return s;
}

}  // namespace stats_detail

// Mid-ranks (1-based), ties receive the average of their covered ranks.
inline std::vector<double> midranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && v[idx[j]] == v[idx[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j - 1)) / 2.0 + 1.0;
        for (std::size_t k = i; k < j; ++k) ranks[idx[k]] = avg;
        i = j;
    }
    return ranks;
}

inline CorrelationResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
    stats_detail::check_pair(x, y, "pearson");
    return stats_detail::r_with_t_test(CorrMethod::pearson, stats_detail::pearson_r(x, y),
                                       x.size());
}

inline CorrelationResult spearman(const std::vector<double>& x, const std::vector<double>& y) {
    stats_detail::check_pair(x, y, "spearman");
    CorrelationResult res = stats_detail::r_with_t_test(
        CorrMethod::spearman, stats_detail::pearson_r(midranks(x), midranks(y)), x.size());
    res.method = CorrMethod::spearman;
    return res;
}

// Exact two-sided p for the pair statistic S = C - D under the permutation
// null: the fraction of all n! orderings of y with |S| at least |S_obs|.
// Valid only without ties; callers guard on n <= 8.
inline double kendall_exact_p(const std::vector<double>& x, const std::vector<double>& y) {
    const long long s_obs = std::llabs(stats_detail::pair_statistic(x, y));
    std::vector<double> perm = y;
    std::sort(perm.begin(), perm.end());
    std::uint64_t hits = 0, total = 0;
    do {
        ++total;
        if (std::llabs(stats_detail::pair_statistic(x, perm)) >= s_obs) ++hits;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(hits) / static_cast<double>(total);
}

// Tie-corrected normal approximation for the pair statistic's null variance.
inline double kendall_normal_p(double con_minus_dis, std::size_t n,
                               const std::vector<double>& x, const std::vector<double>& y) {
    const stats_detail::TieCounts tx = stats_detail::tie_counts(x);
    const stats_detail::TieCounts ty = stats_detail::tie_counts(y);
    const double m = static_cast<double>(n) * (static_cast<double>(n) - 1.0);
    const double var = (m * (2.0 * static_cast<double>(n) + 5.0) - tx.weighted - ty.weighted) /
                           18.0 +
                       (2.0 * tx.pairs * ty.pairs) / m +
                       tx.triple * ty.triple / (9.0 * m * (static_cast<double>(n) - 2.0));
    if (var <= 0.0) return 1.0;
    // continuity correction: the pair statistic is integer-valued
    const double s_adj = std::max(std::fabs(con_minus_dis) - 1.0, 0.0);
    return stats_detail::normal_two_sided(s_adj / std::sqrt(var));
}

inline CorrelationResult kendall(const std::vector<double>& x, const std::vector<double>& y) {
    stats_detail::check_pair(x, y, "kendall");
    const std::size_t n = x.size();

    // Knight's algorithm: sort by (x, y), count discordances as inversions.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });
    std::vector<double> ysorted(n);
    for (std::size_t i = 0; i < n; ++i) ysorted[i] = y[idx[i]];

    // Joint ties: pairs equal in both coordinates.
    double ntie = 0.0;
    {
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j < n && x[idx[j]] == x[idx[i]] && y[idx[j]] == y[idx[i]]) ++j;
            const double t = static_cast<double>(j - i);
            ntie += t * (t - 1.0) / 2.0;
            i = j;
        }
    }

    std::vector<double> buf(n);
    std::vector<double> work = ysorted;
    const double dis = static_cast<double>(stats_detail::merge_count(work, buf, 0, n));

    const stats_detail::TieCounts tx = stats_detail::tie_counts(x);
    const stats_detail::TieCounts ty = stats_detail::tie_counts(y);
    const double tot = static_cast<double>(n) * (static_cast<double>(n) - 1.0) / 2.0;
    const double con_minus_dis = tot - tx.pairs - ty.pairs + ntie - 2.0 * dis;
    const double denom = std::sqrt((tot - tx.pairs) * (tot - ty.pairs));

    CorrelationResult res;
    res.method = CorrMethod::kendall;
    res.n = n;
    res.coefficient = std::clamp(con_minus_dis / denom, -1.0, 1.0);
    if (n <= 8 && tx.pairs == 0.0 && ty.pairs == 0.0) {
        res.p_value = kendall_exact_p(x, y);
    } else {
        res.p_value = kendall_normal_p(con_minus_dis, n, x, y);
    }
    res.significant = res.p_value < kSignificanceAlpha;
    return res;
}

inline CorrelationResult correlate(CorrMethod method, const std::vector<double>& x,
                                   const std::vector<double>& y) {
    switch (method) {
        case CorrMethod::pearson: return pearson(x, y);
        case CorrMethod::spearman: return spearman(x, y);
        case CorrMethod::kendall: return kendall(x, y);
    }
    throw config_error("correlate: unknown method");
}

}  // namespace semcont
