// Prints one PASS/FAIL line per acceptance criterion; exits nonzero on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "pcstream/cli.hpp"
#include "pcstream/kdtree.hpp"
#include "pcstream/optimizer.hpp"
#include "pcstream/simulator.hpp"
#include "pcstream/splitting.hpp"
#include "support/pipelines.hpp"

using namespace pcstream;
using namespace pcstream::kernels;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSuiteSeed = 42;
constexpr int kSuiteSize = 100;
constexpr double kOracleSeconds = 120.0;
constexpr double kPrunedRatio = 0.10;
constexpr std::int64_t kImageBufferLimit = 15;
constexpr std::int64_t kImageOutputLag = 2;
constexpr std::size_t kKnnPoints = 10000;
constexpr std::size_t kKnnQueries = 1000;
constexpr double kKnnSeconds = 30.0;
constexpr std::size_t kChunkCloudPoints = 100000;
constexpr std::size_t kChunkQueries = 500;
constexpr double kChunkShare = 0.25;
constexpr std::size_t kSortPoints = 100000;

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
    std::printf("%s %2d  %-28s %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<PipelineGraph> suite(testing::SuiteOptions opts = {}) {
    testing::RandomPipelines gen(kSuiteSeed, opts);
    std::vector<PipelineGraph> out;
    for (int i = 0; i < kSuiteSize; ++i) out.push_back(gen.next());
    return out;
}

void oracle_optimality(const std::vector<PipelineGraph>& graphs) {
    const auto t0 = std::chrono::steady_clock::now();
    int exact = 0;
    for (const auto& g : graphs) {
        const auto r = verify_against_oracle(g);
        if (r.feasible && r.ilp_feasible && r.match && r.oracle_total == optimize(g).total_buffer) ++exact;
    }
    const double s = seconds_since(t0);
    report(1, "oracle optimality", exact == kSuiteSize && s < kOracleSeconds,
           fmt("%d/%d graphs exact, %.1f s (limit %.0f s)", exact, kSuiteSize, s, kOracleSeconds));
}

void pruning_soundness(const std::vector<PipelineGraph>& graphs) {
    int equal = 0;
    for (const auto& g : graphs) {
        const auto work = derive_work(g);
        const auto a = solve(g, work, build_constraints(g, work, {true, std::nullopt}));
        const auto b = solve(g, work, build_constraints(g, work, {false, std::nullopt}));
        if (a.total_buffer == b.total_buffer) ++equal;
    }
    testing::SuiteOptions w64;
    w64.fixed_input_work = 64;
    std::size_t pruned = 0, unpruned = 0, above = 0;
    double worst = 0;
    for (const auto& g : suite(w64)) {
        const auto work = derive_work(g);
        const auto p = build_constraints(g, work, {true, std::nullopt}).constraint_count();
        const auto u = build_constraints(g, work, {false, std::nullopt}).constraint_count();
        pruned += p;
        unpruned += u;
        const double r = static_cast<double>(p) / static_cast<double>(u);
        worst = std::max(worst, r);
        above += r > kPrunedRatio ? 1 : 0;
    }
    const double aggregate = static_cast<double>(pruned) / static_cast<double>(unpruned);
    report(2, "pruning soundness", equal == kSuiteSize && aggregate <= kPrunedRatio,
           fmt("optimum equal on %d/%d; W0=64 rows %zu/%zu = %.1f%% (limit %.0f%%), per-graph worst %.1f%%, %zu/%d above",
               equal, kSuiteSize, pruned, unpruned, 100 * aggregate, 100 * kPrunedRatio, 100 * worst, above,
               kSuiteSize));
}

void stall_freedom(const std::vector<PipelineGraph>& graphs) {
    int clean = 0, tight = 0, mutated = 0, mutations = 0;
    for (const auto& g : graphs) {
        const auto work = derive_work(g);
        const auto sol = optimize(g);
        const auto trace = simulate(g, work, sol);
        clean += trace.clean() ? 1 : 0;
        tight += peak_occupancy(trace) == sol.buffer_sizes ? 1 : 0;
        for (std::size_t e = 0; e < g.edge_count(); ++e) {
            if (sol.buffer_sizes[e] < 1) continue;
            auto shrunk = sol;
            --shrunk.buffer_sizes[e];
            ++mutations;
            const auto t = simulate(g, work, shrunk);
            if (std::any_of(t.overflows.begin(), t.overflows.end(), [&](const OverflowEvent& o) { return o.edge == e; }))
                ++mutated;
        }
    }
    report(3, "stall-freedom and tightness", clean == kSuiteSize && tight == kSuiteSize && mutated == mutations,
           fmt("clean %d/%d, peak == LB %d/%d, LB-1 overflows %d/%d edges", clean, kSuiteSize, tight, kSuiteSize,
               mutated, mutations));
}

void image_stencil() {
    const auto g = testing::image_stencil_pipeline();
    const auto work = derive_work(g);
    const auto sol = optimize(g);
    const auto trace = simulate(g, work, sol);
    const auto stencil = g.find_stage("stencil3x3").value();
    const bool timed = trace.first_read[stencil] && trace.first_write[stencil];
    const std::int64_t lag = timed ? *trace.first_write[stencil] - *trace.first_read[stencil] : -1;
    report(4, "3x3 stencil over width 5",
           sol.total_buffer <= kImageBufferLimit && trace.clean() && lag == kImageOutputLag,
           fmt("total buffer %lld (limit %lld), %s, first output lags first read by %lld cycles",
               static_cast<long long>(sol.total_buffer), static_cast<long long>(kImageBufferLimit),
               trace.clean() ? "stall-free" : "NOT stall-free", static_cast<long long>(lag)));
}

void multi_chunk(const std::vector<PipelineGraph>& graphs) {
    int runs = 0, good = 0;
    for (const auto& g : graphs) {
        const auto work = derive_work(g);
        const auto single = optimize(g);
        for (std::size_t c : {2u, 4u, 8u, 16u}) {
            ++runs;
            const auto multi = schedule_chunks(single, g, work, c);
            const auto trace = simulate(g, work, multi, c);
            bool ok = trace.clean() && peak_occupancy(trace) == single.buffer_sizes;
            for (std::size_t k = 1; k < c; ++k)
                ok = ok && trace.chunk_completion[k] - trace.chunk_completion[k - 1] == multi.initiation_interval;
            const auto first = *std::min_element(multi.start_cycles.begin(), multi.start_cycles.end());
            ok = ok && multi.makespan == single.makespan + static_cast<std::int64_t>(c - 1) * multi.initiation_interval;
            ok = ok && trace.completion_cycle - first == multi.makespan;
            good += ok ? 1 : 0;
        }
    }
    report(5, "multi-chunk scheduling", good == runs,
           fmt("%d/%d (graph, C in {2,4,8,16}) runs: peaks unchanged, interval == Pi, makespan exact", good, runs));
}

void knn_exactness() {
    const auto cloud = uniform_cloud(kKnnPoints, 1001);
    const auto queries = uniform_cloud(kKnnQueries, 1002).points;
    const auto t0 = std::chrono::steady_clock::now();
    const auto tree = kdtree_build(cloud, 16);
    std::size_t same = 0, total = 0;
    for (std::size_t k : {1, 8, 32})
        for (const auto& q : queries) {
            ++total;
            if (knn_search(tree, q, k).neighbors == brute_force_knn(cloud, q, k)) ++same;
        }
    const double s = seconds_since(t0);
    report(6, "kNN exactness", same == total && s < kKnnSeconds,
           fmt("%zu/%zu (query, k) lists identical to brute force, %.2f s (limit %.0f s)", same, total, s, kKnnSeconds));
}

void deterministic_termination() {
    const auto cloud = uniform_cloud(kKnnPoints, 2001);
    const auto queries = uniform_cloud(kKnnQueries, 2002).points;
    const auto tree = kdtree_build(cloud, 16);
    std::vector<std::vector<Neighbor>> exact;
    for (const auto& q : queries) exact.push_back(brute_force_knn(cloud, q, 32));

    bool bounded = true, monotone = true;
    double last = -1, quarter = 0;
    std::string curve;
    for (double f : {1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2, 1.0}) {
        const auto deadline = profile_deadline(tree, queries, 32, f);
        double sum = 0;
        for (std::size_t i = 0; i < queries.size(); ++i) {
            const auto r = knn_search(tree, queries[i], 32, deadline);
            bounded = bounded && r.steps_used <= deadline;
            sum += recall(r.neighbors, exact[i]);
        }
        const double rc = sum / static_cast<double>(queries.size());
        monotone = monotone && rc >= last;
        last = rc;
        if (f == 0.25) quarter = rc;
        curve += fmt("%s%lld:%.3f", curve.empty() ? "" : " ", static_cast<long long>(deadline), rc);
    }
    report(7, "deterministic termination", bounded && monotone,
           fmt("steps <= deadline %s, recall@32 monotone %s [deadline:recall %s], recall at 1/4 = %.3f",
               bounded ? "100%" : "VIOLATED", monotone ? "yes" : "NO", curve.c_str(), quarter));
}

void chunk_access() {
    const auto cloud = uniform_cloud(kChunkCloudPoints, 3001);
    const auto tree = kdtree_build(cloud, 16);
    const auto grid = split_grid(cloud, {8, 8, 1});
    const auto stats = chunk_access_stats(grid, tree, uniform_cloud(kChunkQueries, 3002).points, {16, 32, 64, 128, 256});
    bool monotone = true;
    std::string curve;
    for (std::size_t i = 0; i < stats.size(); ++i) {
        if (i > 0) monotone = monotone && stats[i].second >= stats[i - 1].second;
        curve += fmt("%sk%zu:%.2f", curve.empty() ? "" : " ", stats[i].first, stats[i].second);
    }
    const double at256 = stats.back().second;
    const double limit = kChunkShare * static_cast<double>(grid.cell_count());
    report(8, "chunk-access trend", monotone && at256 <= limit,
           fmt("[%s] monotone %s, %.2f of %zu chunks at k=256 (limit %.0f)", curve.c_str(), monotone ? "yes" : "NO",
               at256, grid.cell_count(), limit));
}

void chunked_sort_exact() {
    auto cloud = uniform_cloud(kSortPoints, 4001);
    std::mt19937_64 rng(4002);
    for (std::size_t i = 0; i < 5000; ++i) cloud.points[rng() % cloud.size()][rng() % 3] = 0.5f;  // ties
    int cases = 0, exact = 0;
    for (int axis = 0; axis < 3; ++axis) {
        std::vector<std::size_t> oracle(cloud.size());
        std::iota(oracle.begin(), oracle.end(), std::size_t{0});
        std::stable_sort(oracle.begin(), oracle.end(),
                         [&](std::size_t a, std::size_t b) { return cloud.points[a][axis] < cloud.points[b][axis]; });
        std::vector<std::vector<float>> partitions;
        for (std::size_t parts : {1, 2, 8, 80}) partitions.push_back(even_boundaries(cloud, axis, parts));
        for (int r = 0; r < 4; ++r) {
            std::vector<float> cuts;
            for (int i = 0; i < 1 + r * 7; ++i) cuts.push_back(static_cast<float>((rng() >> 11) * 0x1.0p-53));
            cuts.push_back(0.5f);
            std::sort(cuts.begin(), cuts.end());
            partitions.push_back(cuts);
        }
        for (const auto& cuts : partitions) {
            ++cases;
            if (chunked_sort(cloud, axis, cuts) == oracle) ++exact;
        }
    }
    report(9, "chunked sort", exact == cases,
           fmt("%d/%d axis-aligned partitions equal the global stable sort on %zu points", exact, cases, kSortPoints));
}

void splitting_proxy() {
    const std::int64_t points = 64;
    const auto cloud = uniform_cloud(points, 5001);
    const auto grid = split_grid(cloud, {3, 3, 1}, {2, 2, 1}, {1, 1, 1});
    std::int64_t group_points = 0;
    for (std::size_t k = 0; k < grid.group_count(); ++k)
        group_points = std::max<std::int64_t>(group_points, static_cast<std::int64_t>(grid.group_points(k).size()));

    const auto whole = testing::global_chain_pipeline(points);
    const auto mono = optimize(whole);
    const auto per_group = optimize(whole.with_input_work(group_points));
    const double reduction = 1.0 - static_cast<double>(per_group.total_buffer) / static_cast<double>(mono.total_buffer);
    report(10, "splitting reduces buffers", grid.group_count() == 4 && per_group.total_buffer < mono.total_buffer,
           fmt("%zu chunk groups, W %lld -> %lld per group, total buffer %lld -> %lld elements (%.1f%% smaller)",
               grid.group_count(), static_cast<long long>(points), static_cast<long long>(group_points),
               static_cast<long long>(mono.total_buffer), static_cast<long long>(per_group.total_buffer),
               100 * reduction));
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void cli_determinism() {
    const fs::path dir = fs::temp_directory_path() / "pcstream_acceptance";
    fs::create_directories(dir);
    const fs::path src = PCSTREAM_SOURCE_DIR;
    const auto pipe = [&](const char* name) { return (src / "pipelines" / name).string(); };
    const auto sched = (dir / "schedule.json").string();
    {
        std::ostringstream o, e;
        cli::run({"optimize", pipe("knn_stencil.json"), "--out", sched}, o, e);
    }
    const std::vector<std::vector<std::string>> commands{
        {"optimize", pipe("global_chain.json"), "--chunks", "4"},
        {"simulate", pipe("knn_stencil.json"), sched, "--chunks", "4", "--trace", "@trace"},
        {"verify", pipe("knn_stencil.json")},
        {"knn", "--synthetic", "5000", "--k", "16", "--queries", "100", "--deadline-frac", "0.25"},
        {"range", "--synthetic", "5000", "--radius", "0.08", "--queries", "100"},
        {"profile-deadline", "--synthetic", "5000", "--queries", "100"},
        {"stats-chunks", "--synthetic", "5000", "--queries", "100", "--k", "64"},
        {"split", "--scan", "16x500", "--serial", "1024"},
        {"sort", "--synthetic", "5000", "--axis", "x", "--partitions", "8"},
    };
    int identical = 0, total = 0;
    std::string failed;
    for (std::size_t c = 0; c < commands.size(); ++c) {
        std::string outputs[2];
        bool ran = true;
        for (int run = 0; run < 2; ++run) {
            const auto data = dir / fmt("cmd%zu_run%d.out", c, run);
            const auto trace = dir / fmt("cmd%zu_run%d.csv", c, run);
            std::vector<std::string> args{"--seed", "11"};
            for (auto a : commands[c]) args.push_back(a == "@trace" ? trace.string() : a);
            args.push_back("--out");
            args.push_back(data.string());
            std::ostringstream o, e;
            ran = ran && cli::run(args, o, e) == 0;
            outputs[run] = o.str() + "\x1f" + slurp(data) + "\x1f" + slurp(trace);
        }
        ++total;
        if (ran && outputs[0] == outputs[1]) ++identical;
        else failed += " " + commands[c][0];
    }
    fs::remove_all(dir);
    report(11, "CLI determinism", identical == total,
           fmt("%d/%d commands byte-identical across two runs%s%s", identical, total, failed.empty() ? "" : ", differing:",
               failed.c_str()));
}

}  // namespace

int main() {
    const auto graphs = suite();
    oracle_optimality(graphs);
    pruning_soundness(graphs);
    stall_freedom(graphs);
    image_stencil();
    multi_chunk(graphs);
    knn_exactness();
    deterministic_termination();
    chunk_access();
    chunked_sort_exact();
    splitting_proxy();
    cli_determinism();
    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
