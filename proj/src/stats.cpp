#include "envsense/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "envsense/rng.hpp"

namespace envsense {

namespace {

// Bin index of v given edges over [lo, hi]; the last bin is closed above.
std::size_t bin_of(double v, double lo, double width, std::size_t bins) {
    auto idx = static_cast<std::ptrdiff_t>((v - lo) / width);
    if (idx < 0) idx = 0;
    if (idx >= static_cast<std::ptrdiff_t>(bins)) idx = static_cast<std::ptrdiff_t>(bins) - 1;
    return static_cast<std::size_t>(idx);
}

EmpiricalDistribution from_counts(std::vector<double> edges, std::span<const std::size_t> counts,
                                  std::size_t n, double epsilon) {
    EmpiricalDistribution d;
    d.edges = std::move(edges);
    d.mass.resize(counts.size());
    const double denom = static_cast<double>(n) + static_cast<double>(counts.size()) * epsilon;
    for (std::size_t b = 0; b < counts.size(); ++b) {
        d.mass[b] = (static_cast<double>(counts[b]) + epsilon) / denom;
    }
    return d;
}

double jsd_from_masses(std::span<const double> p, std::span<const double> q) {
    // The two KL halves are accumulated separately so swapping the arguments
    // swaps the addends of one final commutative sum: jsd(p,q) == jsd(q,p)
    // holds bit for bit.
    double from_p = 0.0, from_q = 0.0;
    for (std::size_t b = 0; b < p.size(); ++b) {
        const double m = 0.5 * (p[b] + q[b]);
        if (p[b] > 0.0) from_p += p[b] * std::log(p[b] / m);
    }
    for (std::size_t b = 0; b < q.size(); ++b) {
        const double m = 0.5 * (p[b] + q[b]);
        if (q[b] > 0.0) from_q += q[b] * std::log(q[b] / m);
    }
    // nonnegative by Jensen's inequality; rounding may leave a tiny deficit
    return std::max(0.5 * (from_p + from_q), 0.0);
}

}  // namespace

std::pair<EmpiricalDistribution, EmpiricalDistribution> shared_histogram(
    std::span<const double> a, std::span<const double> b, std::size_t bins, double epsilon) {
    if (a.empty() || b.empty()) throw HistogramError("histogram input group is empty");
    if (bins < 2) throw HistogramError("need at least 2 bins");
    if (epsilon < 0.0) throw HistogramError("smoothing must be nonnegative");

    double lo = a[0], hi = a[0];
    for (double v : a) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double v : b) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > lo)) {
        throw HistogramError("degenerate pooled range: all values equal " + std::to_string(lo));
    }

    std::vector<double> edges(bins + 1);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t e = 0; e <= bins; ++e) {
        edges[e] = lo + width * static_cast<double>(e);
    }
    edges[bins] = hi;

    std::vector<std::size_t> ca(bins, 0), cb(bins, 0);
    for (double v : a) ++ca[bin_of(v, lo, width, bins)];
    for (double v : b) ++cb[bin_of(v, lo, width, bins)];

    return {from_counts(edges, ca, a.size(), epsilon), from_counts(std::move(edges), cb, b.size(), epsilon)};
}

double kl_divergence(const EmpiricalDistribution& p, const EmpiricalDistribution& q) {
    if (p.edges != q.edges) throw DivergenceError("distributions use different bin edges");
    double acc = 0.0;
    for (std::size_t b = 0; b < p.bins(); ++b) {
        if (p.mass[b] <= 0.0) continue;
        if (q.mass[b] <= 0.0) {
            throw DivergenceError("infinite divergence: p has mass where q has none (bin " +
                                  std::to_string(b) + ")");
        }
        acc += p.mass[b] * std::log(p.mass[b] / q.mass[b]);
    }
    return acc;
}

double jsd(const EmpiricalDistribution& p, const EmpiricalDistribution& q) {
    if (p.edges != q.edges) throw DivergenceError("distributions use different bin edges");
    return jsd_from_masses(p.mass, q.mass);
}

PermutationResult permutation_test(std::span<const double> group_a,
                                   std::span<const double> group_b,
                                   std::size_t permutations, std::size_t bins, double epsilon,
                                   std::uint64_t seed) {
    if (permutations < 1) throw HistogramError("need at least one permutation");
    auto [da, db] = shared_histogram(group_a, group_b, bins, epsilon);

    PermutationResult result;
    result.seed = seed;
    result.observed_jsd = jsd(da, db);

    // The pooled range (hence the bin of every value) is permutation
    // invariant, so bin indices are computed once and only the counts are
    // redistributed per iteration.
    const std::size_t na = group_a.size();
    const std::size_t n = na + group_b.size();
    const double lo = da.edges.front();
    const double width = (da.edges.back() - lo) / static_cast<double>(bins);
    std::vector<std::uint32_t> pooled_bins;
    pooled_bins.reserve(n);
    for (double v : group_a) pooled_bins.push_back(static_cast<std::uint32_t>(bin_of(v, lo, width, bins)));
    for (double v : group_b) pooled_bins.push_back(static_cast<std::uint32_t>(bin_of(v, lo, width, bins)));

    const double denom_a = static_cast<double>(na) + static_cast<double>(bins) * epsilon;
    const double denom_b = static_cast<double>(n - na) + static_cast<double>(bins) * epsilon;

    result.permuted_jsds.resize(permutations);
    std::vector<std::uint32_t> scratch(n);
    std::vector<double> pa(bins), pb(bins);
    std::vector<std::size_t> ca(bins), cb(bins);
    for (std::size_t it = 0; it < permutations; ++it) {
        auto engine = rng::make_engine(seed, it + 1);
        scratch = pooled_bins;
        // Partial Fisher-Yates: the first na entries form the permuted group A.
        for (std::size_t i = 0; i < na; ++i) {
            const std::size_t j = i + rng::uniform_index(engine, n - i);
            std::swap(scratch[i], scratch[j]);
        }
        std::fill(ca.begin(), ca.end(), 0);
        std::fill(cb.begin(), cb.end(), 0);
        for (std::size_t i = 0; i < na; ++i) ++ca[scratch[i]];
        for (std::size_t i = na; i < n; ++i) ++cb[scratch[i]];
        for (std::size_t b = 0; b < bins; ++b) {
            pa[b] = (static_cast<double>(ca[b]) + epsilon) / denom_a;
            pb[b] = (static_cast<double>(cb[b]) + epsilon) / denom_b;
        }
        result.permuted_jsds[it] = jsd_from_masses(pa, pb);
    }

    std::size_t at_least = 0;
    double sum = 0.0;
    for (double v : result.permuted_jsds) {
        if (v >= result.observed_jsd) ++at_least;
        sum += v;
    }
    const auto m = static_cast<double>(permutations);
    result.p_value = static_cast<double>(1 + at_least) / (m + 1.0);
    result.mean_permuted = sum / m;
    double ss = 0.0;
    for (double v : result.permuted_jsds) {
        const double d = v - result.mean_permuted;
        ss += d * d;
    }
    result.sd_permuted = permutations > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
    return result;
}

}  // namespace envsense
