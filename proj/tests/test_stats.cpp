#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "envsense/rng.hpp"
#include "envsense/stats.hpp"

using namespace envsense;

namespace {

EmpiricalDistribution dist(std::vector<double> edges, std::vector<double> mass) {
    EmpiricalDistribution d;
    d.edges = std::move(edges);
    d.mass = std::move(mass);
    return d;
}

}  // namespace

TEST_CASE("shared histogram puts symmetric counts in symmetric bins") {
    const std::vector<double> a = {0.0, 1.0};
    const std::vector<double> b = {0.0, 1.0};
    auto [p, q] = shared_histogram(a, b, 2, 0.0);
    CHECK(p.edges == q.edges);
    REQUIRE(p.bins() == 2);
    CHECK(p.edges.front() == 0.0);
    CHECK(p.edges.back() == 1.0);
    CHECK(p.mass == std::vector<double>{0.5, 0.5});
    CHECK(q.mass == std::vector<double>{0.5, 0.5});
}

TEST_CASE("shared histogram separates disjoint supports") {
    const std::vector<double> a = {0.0, 0.2, 0.4, 0.9};
    const std::vector<double> b = {2.0, 2.3, 2.9};
    auto [p, q] = shared_histogram(a, b, 2, 0.0);
    CHECK(p.mass == std::vector<double>{1.0, 0.0});
    CHECK(q.mass == std::vector<double>{0.0, 1.0});
}

TEST_CASE("histogram smoothing keeps every bin positive and the mass normalized") {
    std::mt19937_64 engine = rng::make_engine(11);
    std::vector<double> a(40), b(25);
    for (double& v : a) v = rng::gaussian(engine, 0.0, 1.0);
    for (double& v : b) v = rng::gaussian(engine, 3.0, 0.5);
    auto [p, q] = shared_histogram(a, b, 50, 0.5);
    for (const auto& d : {p, q}) {
        double sum = std::accumulate(d.mass.begin(), d.mass.end(), 0.0);
        CHECK(std::abs(sum - 1.0) <= 1e-9);
        for (double m : d.mass) CHECK(m > 0.0);
        for (std::size_t i = 1; i < d.edges.size(); ++i) CHECK(d.edges[i] > d.edges[i - 1]);
    }
}

TEST_CASE("shared histogram rejects degenerate input") {
    const std::vector<double> a = {1.0, 2.0};
    const std::vector<double> flat = {3.0, 3.0};
    CHECK_THROWS_AS(shared_histogram({}, a, 2), HistogramError);
    CHECK_THROWS_AS(shared_histogram(a, {}, 2), HistogramError);
    CHECK_THROWS_AS(shared_histogram(a, a, 1), HistogramError);
    CHECK_THROWS_AS(shared_histogram(flat, flat, 2), HistogramError);
}

TEST_CASE("KL divergence matches hand evaluation") {
    auto p = dist({0, 1, 2}, {0.5, 0.5});
    auto q = dist({0, 1, 2}, {0.25, 0.75});
    // 0.5 ln 2 + 0.5 ln(2/3)
    CHECK(kl_divergence(p, q) == doctest::Approx(0.1438410362258904).epsilon(1e-12));
    CHECK(kl_divergence(p, p) == 0.0);
    CHECK(kl_divergence(q, q) == 0.0);
}

TEST_CASE("KL divergence rejects incompatible or singular input") {
    auto p = dist({0, 1, 2}, {0.5, 0.5});
    auto q = dist({0, 1, 3}, {0.25, 0.75});
    CHECK_THROWS_AS(kl_divergence(p, q), DivergenceError);

    auto point = dist({0, 1, 2}, {1.0, 0.0});
    auto other = dist({0, 1, 2}, {0.0, 1.0});
    CHECK_THROWS_AS(kl_divergence(point, other), DivergenceError);
    // q zero where p is zero too is fine
    CHECK(kl_divergence(point, point) == 0.0);
}

TEST_CASE("JSD matches hand evaluation via the mixture") {
    auto p = dist({0, 1, 2}, {0.5, 0.5});
    auto q = dist({0, 1, 2}, {0.25, 0.75});
    CHECK(jsd(p, q) == doctest::Approx(0.033822075568605185).epsilon(1e-12));
    CHECK(jsd(p, q) == jsd(q, p));
    CHECK(jsd(p, p) == 0.0);
}

TEST_CASE("JSD attains ln 2 on disjoint supports") {
    auto p = dist({0, 1, 2}, {1.0, 0.0});
    auto q = dist({0, 1, 2}, {0.0, 1.0});
    CHECK(jsd(p, q) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("permutation test is deterministic and floors at 1/(M+1)") {
    std::vector<double> a, b;
    for (int i = 0; i < 30; ++i) {
        a.push_back(0.01 * i);
        b.push_back(10.0 + 0.01 * i);
    }
    PermutationResult r1 = permutation_test(a, b, 999, 50, 0.5, 42);
    PermutationResult r2 = permutation_test(a, b, 999, 50, 0.5, 42);
    CHECK(r1.observed_jsd == r2.observed_jsd);
    CHECK(r1.permuted_jsds == r2.permuted_jsds);
    CHECK(r1.p_value == r2.p_value);

    // perfectly separated groups: nothing permuted can reach the observation
    CHECK(r1.p_value == doctest::Approx(0.001).epsilon(1e-15));
    CHECK(r1.permuted_jsds.size() == 999);
    CHECK(r1.seed == 42);

    PermutationResult r3 = permutation_test(a, b, 999, 50, 0.5, 43);
    CHECK(r3.permuted_jsds != r1.permuted_jsds);
}

TEST_CASE("permutation result summary fields match its sample statistics") {
    std::mt19937_64 engine = rng::make_engine(3);
    std::vector<double> a(40), b(60);
    for (double& v : a) v = rng::gaussian(engine, 0.0, 1.0);
    for (double& v : b) v = rng::gaussian(engine, 0.5, 1.0);
    PermutationResult r = permutation_test(a, b, 199, 20, 0.5, 7);

    double mean = std::accumulate(r.permuted_jsds.begin(), r.permuted_jsds.end(), 0.0) /
                  static_cast<double>(r.permuted_jsds.size());
    double ss = 0.0;
    for (double v : r.permuted_jsds) ss += (v - mean) * (v - mean);
    double sd = std::sqrt(ss / static_cast<double>(r.permuted_jsds.size() - 1));
    CHECK(r.mean_permuted == doctest::Approx(mean).epsilon(1e-12));
    CHECK(r.sd_permuted == doctest::Approx(sd).epsilon(1e-12));

    std::size_t ge = 0;
    for (double v : r.permuted_jsds)
        if (v >= r.observed_jsd) ++ge;
    CHECK(r.p_value == doctest::Approx((1.0 + ge) / 200.0).epsilon(1e-15));
    CHECK(r.p_value >= 1.0 / 200.0);
    CHECK(r.p_value <= 1.0);
}

TEST_CASE("permutation test sees no signal in an identical-distribution split") {
    std::mt19937_64 engine = rng::make_engine(17);
    std::vector<double> pooled(200);
    for (double& v : pooled) v = rng::uniform01(engine);
    std::vector<double> a(pooled.begin(), pooled.begin() + 90);
    std::vector<double> b(pooled.begin() + 90, pooled.end());
    PermutationResult r = permutation_test(a, b, 999, 50, 0.5, 99);
    CHECK(r.p_value > 0.05);  // deterministic for this fixed seed pair
}
