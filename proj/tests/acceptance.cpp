// Acceptance suite: one self-contained check per release criterion, each
// printing a single PASS/FAIL line. Run with no arguments for all criteria
// or with a single number to run one of them.
#include <algorithm>
#include <chrono>
#include <climits>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "envsense/classify.hpp"
#include "envsense/core.hpp"
#include "envsense/features.hpp"
#include "envsense/location.hpp"
#include "envsense/pipeline.hpp"
#include "envsense/rng.hpp"
#include "envsense/stats.hpp"
#include "envsense/synth.hpp"

using namespace envsense;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* pattern, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), pattern, args...);
    return buf;
}

// ---------------------------------------------------------------------------
// criterion 1: the DTW dynamic program equals exhaustive enumeration of all
// monotone warping paths, for every sequence pair with lengths <= 6 over
// {0,1,2}, in exact integer arithmetic.

// All monotone paths through an m x n grid, cells flattened as i*n+j and
// stored back to back; path p spans cells[offsets[p] .. offsets[p+1]).
struct ShapePaths {
    std::vector<std::uint8_t> cells;
    std::vector<std::uint32_t> offsets{0};
};

ShapePaths enumerate_paths(std::size_t m, std::size_t n) {
    ShapePaths paths;
    std::vector<std::uint8_t> current;
    auto walk = [&](auto&& self, std::size_t i, std::size_t j) -> void {
        current.push_back(static_cast<std::uint8_t>(i * n + j));
        if (i + 1 == m && j + 1 == n) {
            paths.cells.insert(paths.cells.end(), current.begin(), current.end());
            paths.offsets.push_back(static_cast<std::uint32_t>(paths.cells.size()));
        } else {
            if (i + 1 < m) self(self, i + 1, j);
            if (j + 1 < n) self(self, i, j + 1);
            if (i + 1 < m && j + 1 < n) self(self, i + 1, j + 1);
        }
        current.pop_back();
    };
    walk(walk, 0, 0);
    return paths;
}

int enumerated_min_cost(const std::vector<int>& s, const std::vector<int>& t,
                        const ShapePaths& paths) {
    int cost[36];
    const std::size_t n = t.size();
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const int d = s[i] - t[j];
            cost[i * n + j] = d * d;
        }
    int best = INT_MAX;
    const std::uint8_t* cell = paths.cells.data();
    for (std::size_t p = 0; p + 1 < paths.offsets.size(); ++p) {
        const std::uint8_t* end = paths.cells.data() + paths.offsets[p + 1];
        int sum = 0;
        for (; cell != end; ++cell) sum += cost[*cell];
        best = std::min(best, sum);
    }
    return best;
}

bool criterion1(std::string& detail) {
    const auto start = std::chrono::steady_clock::now();

    std::vector<std::vector<int>> seqs;
    std::vector<std::vector<double>> dseqs;
    for (std::size_t len = 1; len <= 6; ++len) {
        std::size_t count = 1;
        for (std::size_t i = 0; i < len; ++i) count *= 3;
        for (std::size_t id = 0; id < count; ++id) {
            std::vector<int> s(len);
            std::size_t rest = id;
            for (std::size_t i = 0; i < len; ++i) {
                s[i] = static_cast<int>(rest % 3);
                rest /= 3;
            }
            dseqs.emplace_back(s.begin(), s.end());
            seqs.push_back(std::move(s));
        }
    }

    ShapePaths paths[7][7];
    for (std::size_t m = 1; m <= 6; ++m)
        for (std::size_t n = 1; n <= 6; ++n) paths[m][n] = enumerate_paths(m, n);

    std::size_t pairs = 0;
    for (std::size_t a = 0; a < seqs.size(); ++a) {
        for (std::size_t b = a; b < seqs.size(); ++b) {
            const int oracle =
                enumerated_min_cost(seqs[a], seqs[b], paths[seqs[a].size()][seqs[b].size()]);
            const double forward = dtw_distance(dseqs[a], dseqs[b]);
            const double backward = dtw_distance(dseqs[b], dseqs[a]);
            if (forward != static_cast<double>(oracle) || backward != forward) {
                detail = fmt("mismatch at pair (%zu, %zu): enumerated %d, got %.17g / %.17g",
                             a, b, oracle, forward, backward);
                return false;
            }
            ++pairs;
        }
    }
    const double elapsed = seconds_since(start);
    detail = fmt("%zu sequence pairs exact, %.1f s", pairs, elapsed);
    return elapsed < 60.0;
}

// ---------------------------------------------------------------------------
// criterion 2: divergence bounds over random histogram pairs.

bool criterion2(std::string& detail) {
    constexpr double kLn2 = 0.6931471805599453;
    std::mt19937_64 engine = rng::make_engine(20260819);
    const double epsilons[] = {0.1, 0.5, 1.0};

    for (int iter = 0; iter < 10000; ++iter) {
        const std::size_t na = 2 + rng::uniform_index(engine, 49);
        const std::size_t nb = 2 + rng::uniform_index(engine, 49);
        const double mu_a = rng::gaussian(engine, 0.0, 5.0);
        const double mu_b = rng::gaussian(engine, 0.0, 5.0);
        const double sd_a = 0.1 + 3.0 * rng::uniform01(engine);
        const double sd_b = 0.1 + 3.0 * rng::uniform01(engine);
        std::vector<double> a(na), b(nb);
        for (double& v : a) v = rng::gaussian(engine, mu_a, sd_a);
        for (double& v : b) v = rng::gaussian(engine, mu_b, sd_b);
        const std::size_t bins = 2 + rng::uniform_index(engine, 63);
        const double epsilon = epsilons[rng::uniform_index(engine, 3)];

        const auto [da, db] = shared_histogram(a, b, bins, epsilon);
        const double js = jsd(da, db);
        const double js_rev = jsd(db, da);
        const double js_self = jsd(da, da);
        const double kl = kl_divergence(da, db);

        if (js < 0.0 || js > kLn2 + 1e-12) {
            detail = fmt("iteration %d: JSD %.17g outside [0, ln 2]", iter, js);
            return false;
        }
        if (std::abs(js - js_rev) > 1e-12) {
            detail = fmt("iteration %d: asymmetry %.3g", iter, std::abs(js - js_rev));
            return false;
        }
        if (js_self > 1e-12) {
            detail = fmt("iteration %d: JSD(P,P) = %.3g", iter, js_self);
            return false;
        }
        if (kl < -1e-12) {
            detail = fmt("iteration %d: KL %.3g below zero", iter, kl);
            return false;
        }
    }
    detail = "10000 histogram pairs within bounds";
    return true;
}

// ---------------------------------------------------------------------------
// criterion 3: the temperature gradient of an affine series is its slope.

bool criterion3(std::string& detail) {
    std::mt19937_64 engine = rng::make_engine(333);
    double worst = 0.0;
    for (int iter = 0; iter < 1000; ++iter) {
        const double magnitude = std::exp(std::log(1e-3) +
                                          (std::log(3.0) - std::log(1e-3)) *
                                              rng::uniform01(engine));
        const double slope = rng::uniform01(engine) < 0.5 ? magnitude : -magnitude;
        const double intercept = rng::gaussian(engine, 24.0, 20.0);
        const double dt = 0.25 + 3.75 * rng::uniform01(engine);
        const std::size_t w = 2 + rng::uniform_index(engine, 39);
        const std::size_t n = w + 1 + rng::uniform_index(engine, 20);
        const std::size_t end = w + rng::uniform_index(engine, n - w);

        std::vector<SensorSample> samples(n);
        for (std::size_t i = 0; i < n; ++i) {
            samples[i].timestamp = static_cast<double>(i) * dt;
            samples[i].channel(Channel::Temperature) =
                intercept + slope * samples[i].timestamp;
        }
        const SensorStream stream = SensorStream::create(std::move(samples));
        const double gradient = temp_gradient(Window(stream, end, w));
        const double relative = std::abs(gradient - slope) / std::abs(slope);
        worst = std::max(worst, relative);
        if (relative > 1e-9) {
            detail = fmt("iteration %d: slope %.6g recovered as %.17g (rel err %.3g)",
                         iter, slope, gradient, relative);
            return false;
        }
    }
    detail = fmt("1000 affine windows, worst relative error %.3g", worst);
    return true;
}

// ---------------------------------------------------------------------------
// shared helper for criteria 4-6 and 8: the default dataset's feature
// vectors, extracted exactly the way the pipeline extracts them.

const std::vector<FeatureVector>& default_features(std::uint64_t seed) {
    static std::map<std::uint64_t, std::vector<FeatureVector>> cache;
    auto it = cache.find(seed);
    if (it != cache.end()) return it->second;

    GeneratorConfig gen;
    gen.seed = seed;
    LabeledDataset data = generate(gen);

    LocationContext context;
    context.lab = fit_reference_stats(
        data.reference({StreamSource::Kind::ReferenceLab, -1})->channel_values(Channel::Light));
    context.cubicle = fit_reference_stats(
        data.reference({StreamSource::Kind::ReferenceCubicle, -1})
            ->channel_values(Channel::Light));
    context.stair_template = build_stair_template(gen.floor_lights, gen.landing_light,
                                                  gen.climb_velocity, gen.sampling_rate);

    std::vector<FeatureVector> vectors;
    for (const Episode& episode : data.episodes) {
        auto part = extract_features(data.wearable[episode.stream_index], 60, 60, &context);
        vectors.insert(vectors.end(), part.begin(), part.end());
    }
    std::erase_if(vectors, [](const FeatureVector& fv) {
        if (!fv.label) return true;
        for (Feature f : kAllFeatures)
            if (!fv.get(f)) return true;
        return false;
    });
    return cache.emplace(seed, std::move(vectors)).first->second;
}

void gradient_groups(const std::vector<FeatureVector>& vectors, std::vector<double>& dyn,
                     std::vector<double>& stat) {
    for (const FeatureVector& fv : vectors) {
        if (is_dynamic_activity(*fv.label))
            dyn.push_back(*fv.temp_gradient);
        else if (is_static_activity(*fv.label))
            stat.push_back(*fv.temp_gradient);
    }
}

// ---------------------------------------------------------------------------
// criterion 4: the gradient hypothesis is maximally significant on every
// seed, and the permutation p-value is calibrated under a shuffled null.

bool criterion4(std::string& detail) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::vector<double> dyn, stat;
        gradient_groups(default_features(seed), dyn, stat);
        const PermutationResult result =
            permutation_test(dyn, stat, 999, 50, 0.5, rng::derive_seed(seed, 500));
        if (result.p_value != 0.001) {
            detail = fmt("seed %llu: p = %.6g, expected 0.001",
                         static_cast<unsigned long long>(seed), result.p_value);
            return false;
        }
    }

    // Null calibration: with labels shuffled, p <= 0.1 should occur for
    // roughly a tenth of the trials.
    std::vector<double> dyn, stat;
    gradient_groups(default_features(1), dyn, stat);
    std::vector<double> pooled = dyn;
    pooled.insert(pooled.end(), stat.begin(), stat.end());

    int low_p = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::mt19937_64 engine = rng::make_engine(999, static_cast<std::uint64_t>(trial));
        std::vector<double> shuffled = pooled;
        rng::shuffle(shuffled, engine);
        const std::span<const double> a(shuffled.data(), dyn.size());
        const std::span<const double> b(shuffled.data() + dyn.size(),
                                        shuffled.size() - dyn.size());
        const PermutationResult result = permutation_test(
            a, b, 999, 50, 0.5, rng::derive_seed(888, static_cast<std::uint64_t>(trial)));
        if (result.p_value <= 0.1 + 1e-12) ++low_p;
    }
    const double fraction = low_p / 200.0;
    detail = fmt("p = 0.001 on 20/20 seeds; null fraction(p <= 0.1) = %.3f", fraction);
    return fraction >= 0.04 && fraction <= 0.18;
}

// ---------------------------------------------------------------------------
// criterion 5: the four hypothesis features separate their groups on every
// seed of the default generator.

bool criterion5(std::string& detail) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto& vectors = default_features(seed);

        std::vector<double> dyn, stat;
        gradient_groups(vectors, dyn, stat);
        const double dyn_mean = std::accumulate(dyn.begin(), dyn.end(), 0.0) /
                                static_cast<double>(dyn.size());
        const double stat_mean = std::accumulate(stat.begin(), stat.end(), 0.0) /
                                 static_cast<double>(stat.size());
        if (!(dyn_mean < stat_mean)) {
            detail = fmt("seed %llu: dynamic gradient mean %.4g not below static %.4g",
                         static_cast<unsigned long long>(seed), dyn_mean, stat_mean);
            return false;
        }

        double rest_sum = 0.0, other_sum = 0.0;
        std::size_t rest_n = 0, other_n = 0;
        for (const FeatureVector& fv : vectors) {
            if (*fv.label == ActivityLabel::Rest) {
                rest_sum += *fv.humidity_sd;
                ++rest_n;
            } else {
                other_sum += *fv.humidity_sd;
                ++other_n;
            }
        }
        if (!(rest_sum / static_cast<double>(rest_n) >
              other_sum / static_cast<double>(other_n))) {
            detail = fmt("seed %llu: rest humidity sd not above the rest",
                         static_cast<unsigned long long>(seed));
            return false;
        }

        std::size_t location_total = 0, location_correct = 0;
        for (const FeatureVector& fv : vectors) {
            const bool in_lab = *fv.label == ActivityLabel::SitLab;
            if (!in_lab && *fv.label != ActivityLabel::SitCubicle) continue;
            ++location_total;
            const Location predicted = classify_location(*fv.light_lr, 0.0);
            if (predicted == (in_lab ? Location::Lab : Location::Cubicle)) ++location_correct;
        }
        const double location_accuracy =
            static_cast<double>(location_correct) / static_cast<double>(location_total);
        if (location_accuracy < 0.99) {
            detail = fmt("seed %llu: location accuracy %.4f over %zu windows",
                         static_cast<unsigned long long>(seed), location_accuracy,
                         location_total);
            return false;
        }

        std::vector<double> stair, other;
        for (const FeatureVector& fv : vectors)
            (*fv.label == ActivityLabel::ClimbStairs ? stair : other).push_back(*fv.dtw_dist);
        std::sort(other.begin(), other.end());
        const std::size_t rank = static_cast<std::size_t>(
            std::ceil(0.1 * static_cast<double>(other.size())));
        const double p10 = other[rank - 1];
        const double stair_max = *std::max_element(stair.begin(), stair.end());
        if (!(stair_max < p10)) {
            detail = fmt("seed %llu: stair DTW max %.1f not below non-stair p10 %.1f",
                         static_cast<unsigned long long>(seed), stair_max, p10);
            return false;
        }
    }
    detail = "gradient, humidity, location and stair separations hold on 20/20 seeds";
    return true;
}

// ---------------------------------------------------------------------------
// criterion 6: random-forest accuracy ordering across the feature masks.

bool criterion6(std::string& detail) {
    int satisfied = 0;
    double slowest = 0.0;
    double fused_min = 1.0, accel_max = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto start = std::chrono::steady_clock::now();
        const auto& vectors = default_features(seed);

        ModelSpec spec;
        spec.kind = ModelSpec::Kind::RandomForest;
        double accuracy[3] = {0.0, 0.0, 0.0};
        const FeatureMask masks[3] = {FeatureMask::AccelOnly, FeatureMask::EnvOnly,
                                      FeatureMask::Fused};
        for (int m = 0; m < 3; ++m) {
            const FeatureMatrix matrix = FeatureMatrix::from_vectors(vectors, masks[m]);
            accuracy[m] = cross_validate(matrix, spec, 10, seed).matrix.accuracy();
        }
        const double elapsed = seconds_since(start);
        slowest = std::max(slowest, elapsed);
        if (elapsed >= 300.0) {
            detail = fmt("seed %llu took %.1f s, budget is 300 s",
                         static_cast<unsigned long long>(seed), elapsed);
            return false;
        }

        const bool ordered = accuracy[2] >= accuracy[1] && accuracy[1] >= accuracy[0];
        const bool bounded = accuracy[2] >= 0.95 && accuracy[0] <= 0.70;
        if (ordered && bounded) ++satisfied;
        fused_min = std::min(fused_min, accuracy[2]);
        accel_max = std::max(accel_max, accuracy[0]);
    }
    detail = fmt("%d/20 seeds ordered and bounded (fused >= %.4f, accel <= %.4f, "
                 "slowest seed %.1f s)",
                 satisfied, fused_min, accel_max, slowest);
    return satisfied >= 18;
}

// ---------------------------------------------------------------------------
// criterion 7: two pipeline runs with one config produce identical bytes.

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

bool criterion7(std::string& detail) {
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "envsense_acceptance_7";
    fs::remove_all(base);

    PipelineConfig config;
    config.out_dir = (base / "first").string();
    const PipelineResult first = run_pipeline(config);
    config.out_dir = (base / "second").string();
    const PipelineResult second = run_pipeline(config);

    if (first.files.size() != second.files.size()) {
        detail = "runs produced different file sets";
        return false;
    }
    for (std::size_t i = 0; i < first.files.size(); ++i) {
        if (slurp(first.files[i]) != slurp(second.files[i])) {
            detail = "byte difference in " + first.files[i].filename().string();
            return false;
        }
    }
    detail = fmt("%zu report files byte-identical across runs", first.files.size());
    fs::remove_all(base);
    return true;
}

// ---------------------------------------------------------------------------
// criterion 8: every cross-validation report is internally consistent.

bool criterion8(std::string& detail) {
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "envsense_acceptance_8";
    fs::remove_all(base);

    PipelineConfig config;
    config.out_dir = base.string();
    const PipelineResult result = run_pipeline(config);
    fs::remove_all(base);

    // independently recount the class sizes the pipeline must have seen
    std::map<ActivityLabel, std::size_t> class_counts;
    for (const FeatureVector& fv : default_features(config.seed)) ++class_counts[*fv.label];

    for (std::size_t r = 0; r < result.cv_reports.size(); ++r) {
        const CVReport& report = result.cv_reports[r];
        std::size_t total = 0, trace = 0;
        for (std::size_t i = 0; i < report.matrix.classes.size(); ++i) {
            std::size_t row_sum = 0;
            for (std::size_t j = 0; j < report.matrix.counts[i].size(); ++j) {
                row_sum += report.matrix.counts[i][j];
                if (i == j) trace += report.matrix.counts[i][j];
            }
            total += row_sum;
            if (row_sum != class_counts[report.matrix.classes[i]]) {
                detail = fmt("report %zu: row %zu sums to %zu, class has %zu windows", r, i,
                             row_sum, class_counts[report.matrix.classes[i]]);
                return false;
            }
        }
        const double recomputed = static_cast<double>(trace) / static_cast<double>(total);
        if (std::abs(recomputed - report.matrix.accuracy()) > 1e-12) {
            detail = fmt("report %zu: accuracy %.17g but trace/total %.17g", r,
                         report.matrix.accuracy(), recomputed);
            return false;
        }
    }

    // the published table must match its underlying confusion matrices
    for (std::size_t r = 0; r < result.accuracy.models.size(); ++r)
        for (std::size_t m = 0; m < 3; ++m) {
            const double table = result.accuracy.accuracies[r][m];
            const double matrix = result.cv_reports[r * 3 + m].matrix.accuracy();
            if (std::abs(table - matrix) > 1e-12) {
                detail = fmt("table entry (%zu, %zu) = %.17g, matrix gives %.17g", r, m, table,
                             matrix);
                return false;
            }
        }
    detail = fmt("%zu reports consistent", result.cv_reports.size());
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    using Criterion = bool (*)(std::string&);
    const Criterion criteria[] = {criterion1, criterion2, criterion3, criterion4,
                                  criterion5, criterion6, criterion7, criterion8};

    int only = 0;
    if (argc > 1) {
        only = std::atoi(argv[1]);
        if (only < 1 || only > 8) {
            std::fprintf(stderr, "usage: %s [1-8]\n", argv[0]);
            return 2;
        }
    }

    bool all_passed = true;
    for (int n = 1; n <= 8; ++n) {
        if (only != 0 && n != only) continue;
        std::string detail;
        bool passed = false;
        try {
            passed = criteria[n - 1](detail);
        } catch (const std::exception& e) {
            detail = std::string("unexpected error: ") + e.what();
        }
        std::printf("criterion %d: %s (%s)\n", n, passed ? "PASS" : "FAIL", detail.c_str());
        std::fflush(stdout);
        all_passed = all_passed && passed;
    }
    return all_passed ? 0 : 1;
}
