#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "envsense/error.hpp"

namespace envsense {

// Discrete histogram density over shared bin edges.
struct EmpiricalDistribution {
    std::vector<double> edges;  // strictly increasing, bins()+1 entries
    std::vector<double> mass;   // sums to 1

    std::size_t bins() const { return mass.size(); }
};

// Histograms of both sample sets over one shared set of edges spanning the
// pooled min-max range. Bin mass is (count + epsilon) / (n + bins*epsilon);
// epsilon > 0 keeps every bin positive so KL stays finite. Throws
// HistogramError when a set is empty, bins < 2, or the pooled range is
// degenerate.
std::pair<EmpiricalDistribution, EmpiricalDistribution> shared_histogram(
    std::span<const double> a, std::span<const double> b, std::size_t bins,
    double epsilon = 0.5);

// Discrete Kullback-Leibler divergence sum_b p_b ln(p_b/q_b) over bins with
// p_b > 0. Throws DivergenceError on mismatched edges or when some p_b > 0
// sits on a zero q_b.
double kl_divergence(const EmpiricalDistribution& p, const EmpiricalDistribution& q);

// Jensen-Shannon divergence: the mean KL of each density against their
// pointwise mixture. Symmetric and bounded by ln 2.
double jsd(const EmpiricalDistribution& p, const EmpiricalDistribution& q);

struct PermutationResult {
    double observed_jsd = 0.0;
    std::vector<double> permuted_jsds;
    double p_value = 1.0;
    double mean_permuted = 0.0;
    double sd_permuted = 0.0;  // sample standard deviation of the permuted JSDs
    std::uint64_t seed = 0;
};

// Label-permutation significance test of the JSD between two feature-sample
// groups. The observed JSD comes from the true grouping; each of the
// `permutations` iterations relabels the pooled samples uniformly at random
// (group sizes preserved) on an RNG substream derived from (seed, index), so
// the result is independent of evaluation order. p = r/(M+1) with
// r = 1 + #{permuted >= observed}: the observation's worst-case rank among
// all M+1 values.
PermutationResult permutation_test(std::span<const double> group_a,
                                   std::span<const double> group_b,
                                   std::size_t permutations, std::size_t bins,
                                   double epsilon, std::uint64_t seed);

}  // namespace envsense
