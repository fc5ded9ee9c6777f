#include "pcstream/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "pcstream/graph.hpp"
#include "pcstream/kdtree.hpp"
#include "pcstream/optimizer.hpp"
#include "pcstream/pointcloud.hpp"
#include "pcstream/simulator.hpp"
#include "pcstream/splitting.hpp"

namespace pcstream::cli {

namespace {

using nlohmann::ordered_json;
using namespace kernels;

constexpr const char* kGenerator = "mt19937_64";

struct UsageFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::uint64_t seed = 1;
    std::string format = "text";
    std::string out;
};

std::string number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageFailure("cannot write '" + path + "'");
    f << text;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw UsageFailure("cannot read '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Triple parse_triple(const std::string& text, const char* what) {
    Triple t{1, 1, 1};
    std::size_t axis = 0;
    const char* p = text.data();
    const char* end = p + text.size();
    while (p < end) {
        if (axis == 3) throw UsageFailure(std::string(what) + " takes at most three sizes, e.g. 8x8x1");
        std::size_t v = 0;
        const auto res = std::from_chars(p, end, v);
        if (res.ec != std::errc() || v == 0) throw UsageFailure(std::string(what) + " '" + text + "' is not like 8x8x1");
        t[axis++] = v;
        p = res.ptr;
        if (p < end && *p != 'x') throw UsageFailure(std::string(what) + " '" + text + "' is not like 8x8x1");
        if (p < end) ++p;
    }
    if (axis == 0) throw UsageFailure(std::string(what) + " is empty");
    return t;
}

ordered_json triple_json(const Triple& t) { return ordered_json::array({t[0], t[1], t[2]}); }

CloudFormat cloud_format(const Globals& g) { return g.format == "binary" ? CloudFormat::Binary : CloudFormat::Text; }

// ---------------------------------------------------------------------------
// point cloud inputs shared by the kernel commands

struct CloudArgs {
    std::string path;
    std::size_t synthetic = 0;
    std::string scan;  // RINGSxPOINTS
    std::string query_path;
    std::size_t query_count = 1000;
    std::size_t leaf_size = 16;

    void add_to(CLI::App* cmd, bool with_queries) {
        auto* file = cmd->add_option("--cloud", path, "point cloud file (see --format)");
        auto* syn = cmd->add_option("--synthetic", synthetic, "uniform random cloud of N points in the unit cube")
                        ->check(CLI::PositiveNumber);
        auto* sc = cmd->add_option("--scan", scan, "ring-scan cloud, RINGSxPOINTS per ring");
        file->excludes(syn)->excludes(sc);
        syn->excludes(sc);
        if (with_queries) {
            cmd->add_option("--query-file", query_path, "query points file");
            cmd->add_option("--queries", query_count, "number of random queries inside the cloud bounds")
                ->check(CLI::PositiveNumber);
            cmd->add_option("--leaf-size", leaf_size, "kd-tree leaf bucket size")->check(CLI::PositiveNumber);
        }
    }
};

struct LoadedCloud {
    PointCloud cloud;
    ordered_json source;
};

LoadedCloud load(const CloudArgs& a, const Globals& g) {
    LoadedCloud out;
    if (!a.path.empty()) {
        out.cloud = load_cloud(a.path, cloud_format(g));
        out.source = {{"file", a.path}, {"format", g.format}};
    } else if (a.synthetic > 0) {
        out.cloud = uniform_cloud(a.synthetic, g.seed);
        out.source = {{"synthetic", "uniform"}, {"generator", kGenerator}, {"seed", g.seed}};
    } else if (!a.scan.empty()) {
        const auto dims = parse_triple(a.scan, "--scan");
        out.cloud = scan_cloud(dims[0], dims[1], g.seed);
        out.source = {{"synthetic", "scan"}, {"rings", dims[0]}, {"points_per_ring", dims[1]},
                      {"generator", kGenerator}, {"seed", g.seed}};
    } else {
        throw UsageFailure("need one of --cloud, --synthetic or --scan");
    }
    out.source["points"] = out.cloud.size();
    return out;
}

std::vector<Point> load_queries(const CloudArgs& a, const Globals& g, const PointCloud& cloud) {
    if (!a.query_path.empty()) return load_cloud(a.query_path, cloud_format(g)).points;
    const auto box = bounding_box(cloud);
    auto unit = uniform_cloud(a.query_count, g.seed + 1).points;
    for (auto& q : unit)
        for (int d = 0; d < 3; ++d)
            q[d] = static_cast<float>(box.lo[d] + static_cast<double>(q[d]) * (static_cast<double>(box.hi[d]) - box.lo[d]));
    return unit;
}

std::optional<std::int64_t> parse_deadline(const std::string& text) {
    if (text.empty() || text == "inf") return std::nullopt;
    std::int64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || v < 1)
        throw UsageFailure("deadline must be a positive step count or 'inf'");
    return v;
}

ordered_json deadline_json(const std::optional<std::int64_t>& d) { return d ? ordered_json(*d) : ordered_json("inf"); }

// ---------------------------------------------------------------------------
// scheduling commands

struct OptimizeArgs {
    std::string graph;
    bool no_prune = false;
    std::optional<std::int64_t> horizon;
    std::size_t chunks = 1;
    std::int64_t element_bytes = 4;
};

int cmd_optimize(const OptimizeArgs& a, const Globals& g, std::ostream& out) {
    const auto graph = load_pipeline(a.graph);
    BuildOptions opts;
    opts.pruned = !a.no_prune;
    opts.horizon = a.horizon;
    auto sol = optimize(graph, opts);
    if (a.chunks > 1) sol = schedule_chunks(sol, graph, derive_work(graph), a.chunks);
    if (!g.out.empty()) write_file(g.out, schedule_to_json(graph, sol, a.element_bytes));

    ordered_json doc;
    doc["graph"] = a.graph;
    doc["total_buffer_elements"] = sol.total_buffer;
    doc["total_buffer_bytes"] = sol.total_buffer * a.element_bytes;
    doc["makespan"] = sol.makespan;
    doc["chunks"] = sol.chunk_count;
    doc["initiation_interval"] = sol.initiation_interval;
    doc["constraints_used"] = a.no_prune ? sol.constraints_unpruned : sol.constraints_pruned;
    doc["constraints_pruned"] = sol.constraints_pruned;
    doc["constraints_unpruned"] = sol.constraints_unpruned;
    ordered_json starts = ordered_json::object();
    for (std::size_t i = 0; i < graph.stage_count(); ++i) starts[graph.stages()[i].id] = sol.start_cycles[i];
    doc["start_cycles"] = std::move(starts);
    ordered_json buffers = ordered_json::array();
    for (std::size_t e = 0; e < graph.edge_count(); ++e)
        buffers.push_back({{"producer", graph.stages()[graph.edges()[e].producer].id},
                           {"consumer", graph.stages()[graph.edges()[e].consumer].id},
                           {"elements", sol.buffer_sizes[e]}});
    doc["buffers"] = std::move(buffers);
    out << doc.dump(2) << '\n';
    return Ok;
}

struct SimulateArgs {
    std::string graph;
    std::string schedule;
    std::optional<std::size_t> chunks;
    std::string trace;
    std::int64_t trace_stride = 1;
};

int cmd_simulate(const SimulateArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
    const auto graph = load_pipeline(a.graph);
    const auto work = derive_work(graph);
    auto sol = schedule_from_json(graph, read_file(a.schedule));
    const std::size_t chunks = a.chunks.value_or(sol.chunk_count);
    if (chunks != sol.chunk_count || (chunks > 1 && sol.bubbles.empty())) {
        sol.makespan = makespan_of(graph, work, sol.start_cycles);
        sol.chunk_count = 1;
        sol.bubbles.clear();
        sol = schedule_chunks(sol, graph, work, chunks);
    }
    const auto trace = simulate(graph, work, sol, chunks);
    const auto summary = trace_summary_json(graph, trace, sol);
    out << summary;
    if (!g.out.empty()) write_file(g.out, summary);
    if (!a.trace.empty()) write_file(a.trace, trace_csv(graph, trace, a.trace_stride));
    if (trace.clean()) return Ok;
    for (const auto& o : trace.overflows) {
        const auto& edge = graph.edges()[o.edge];
        err << "overflow: cycle " << o.cycle << " edge " << graph.stages()[edge.producer].id << "->"
            << graph.stages()[edge.consumer].id << " holds " << o.occupancy << " > " << o.capacity << '\n';
    }
    for (const auto& s : trace.stalls)
        err << "stall: cycle " << s.cycle << " stage " << graph.stages()[s.stage].id << " chunk " << s.chunk << ": "
            << s.cause << '\n';
    return VerifyFailed;
}

struct VerifyArgs {
    std::string graph;
    std::optional<std::int64_t> horizon;
};

int cmd_verify(const VerifyArgs& a, const Globals&, std::ostream& out) {
    const auto graph = load_pipeline(a.graph);
    const auto report = verify_against_oracle(graph, a.horizon);
    ordered_json doc;
    doc["graph"] = a.graph;
    doc["oracle_feasible"] = report.feasible;
    doc["ilp_feasible"] = report.ilp_feasible;
    doc["oracle_total"] = report.oracle_total;
    doc["ilp_total"] = report.ilp_total;
    doc["oracle_starts"] = report.oracle_starts;
    doc["candidates"] = report.candidates;
    doc["match"] = report.match;
    out << doc.dump(2) << '\n';
    return report.match ? Ok : VerifyFailed;
}

// ---------------------------------------------------------------------------
// kernel commands

struct SearchArgs {
    CloudArgs cloud;
    std::size_t k = 32;
    double radius = 0.05;
    std::string deadline = "inf";
    std::optional<double> deadline_frac;
    std::optional<std::int64_t> banks;
};

int cmd_knn(const SearchArgs& a, const Globals& g, std::ostream& out, bool range) {
    if (range && !(a.radius > 0)) throw UsageFailure("--radius must be positive");
    const auto src = load(a.cloud, g);
    const auto& cloud = src.cloud;
    const auto tree = kdtree_build(cloud, a.cloud.leaf_size);
    const auto queries = load_queries(a.cloud, g, cloud);
    if (queries.empty()) throw UsageFailure("no queries");

    std::optional<std::int64_t> deadline = parse_deadline(a.deadline);
    if (a.deadline_frac) deadline = profile_deadline(tree, queries, a.k, *a.deadline_frac);

    std::vector<SearchResult> results;
    if (a.banks && !range) {
        if (queries.size() < 2) throw UsageFailure("--banks needs at least two queries");
        results = knn_search_elide(tree, queries, BankModel{*a.banks}, a.k, deadline);
    } else {
        for (const auto& q : queries)
            results.push_back(range ? range_search(tree, q, a.radius, deadline) : knn_search(tree, q, a.k, deadline));
    }

    std::ostringstream csv;
    csv << "query,rank,index,dist2\n";
    double recall_sum = 0;
    std::int64_t steps = 0, max_steps = 0, elided = 0;
    std::size_t truncated = 0, found = 0;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto& r = results[i];
        const auto exact = range ? brute_force_range(cloud, queries[i], a.radius) : brute_force_knn(cloud, queries[i], a.k);
        recall_sum += recall(r.neighbors, exact);
        steps += r.steps_used;
        max_steps = std::max(max_steps, r.steps_used);
        truncated += r.truncated ? 1 : 0;
        elided += r.elided;
        found += r.neighbors.size();
        for (std::size_t j = 0; j < r.neighbors.size(); ++j)
            csv << i << ',' << j << ',' << r.neighbors[j].index << ',' << number(r.neighbors[j].dist2) << '\n';
    }
    if (!g.out.empty()) write_file(g.out, csv.str());

    const double n = static_cast<double>(queries.size());
    ordered_json doc;
    doc["cloud"] = src.source;
    doc["queries"] = queries.size();
    doc["leaf_size"] = a.cloud.leaf_size;
    doc["tree_depth"] = tree.depth();
    if (range) doc["radius"] = a.radius;
    else doc["k"] = a.k;
    doc["deadline"] = deadline_json(deadline);
    if (a.deadline_frac) doc["deadline_fraction"] = *a.deadline_frac;
    if (a.banks && !range) doc["banks"] = *a.banks;
    doc["mean_steps"] = static_cast<double>(steps) / n;
    doc["max_steps"] = max_steps;
    doc["truncated"] = truncated;
    if (a.banks && !range) doc["elided"] = elided;
    doc["mean_results"] = static_cast<double>(found) / n;
    doc["recall"] = recall_sum / n;
    out << doc.dump(2) << '\n';
    return Ok;
}

struct ProfileArgs {
    CloudArgs cloud;
    std::size_t k = 32;
    std::vector<double> fractions{0.0625, 0.125, 0.25, 0.5, 1.0};
};

int cmd_profile(const ProfileArgs& a, const Globals& g, std::ostream& out) {
    const auto src = load(a.cloud, g);
    const auto tree = kdtree_build(src.cloud, a.cloud.leaf_size);
    const auto queries = load_queries(a.cloud, g, src.cloud);
    const auto profile = profile_steps(tree, queries, a.k);

    std::vector<std::vector<Neighbor>> exact;
    exact.reserve(queries.size());
    for (const auto& q : queries) exact.push_back(brute_force_knn(src.cloud, q, a.k));

    std::ostringstream csv;
    csv << "fraction,deadline,recall,truncated,mean_full_steps\n";
    for (double f : a.fractions) {
        const auto deadline = profile_deadline(tree, queries, a.k, f);
        double rsum = 0;
        std::size_t truncated = 0;
        for (std::size_t i = 0; i < queries.size(); ++i) {
            const auto r = knn_search(tree, queries[i], a.k, deadline);
            rsum += recall(r.neighbors, exact[i]);
            truncated += r.truncated ? 1 : 0;
        }
        csv << number(f) << ',' << deadline << ',' << number(rsum / static_cast<double>(queries.size())) << ','
            << truncated << ',' << number(profile.mean) << '\n';
    }
    out << csv.str();
    if (!g.out.empty()) write_file(g.out, csv.str());
    return Ok;
}

struct ChunkStatsArgs {
    CloudArgs cloud;
    std::string grid = "8x8x1";
    std::vector<std::size_t> ks{256};
};

int cmd_stats_chunks(const ChunkStatsArgs& a, const Globals& g, std::ostream& out) {
    const auto src = load(a.cloud, g);
    const auto grid = split_grid(src.cloud, parse_triple(a.grid, "--grid"));
    const auto tree = kdtree_build(src.cloud, a.cloud.leaf_size);
    const auto queries = load_queries(a.cloud, g, src.cloud);

    auto ks = a.ks;
    if (ks.size() == 1) {
        const auto top = ks[0];
        ks.clear();
        for (std::size_t k = 1; k < top; k *= 2) ks.push_back(k);
        ks.push_back(top);
    }
    std::ostringstream csv;
    csv << "k,mean_chunks,total_chunks\n";
    for (const auto& [k, mean] : chunk_access_stats(grid, tree, queries, ks))
        csv << k << ',' << number(mean) << ',' << grid.cell_count() << '\n';
    out << csv.str();
    if (!g.out.empty()) write_file(g.out, csv.str());
    return Ok;
}

struct SplitArgs {
    CloudArgs cloud;
    std::string grid;
    std::string kernel = "1x1x1";
    std::string stride = "1x1x1";
    std::size_t serial = 0;
};

int cmd_split(const SplitArgs& a, const Globals& g, std::ostream& out) {
    const auto src = load(a.cloud, g);
    ordered_json doc;
    doc["cloud"] = src.source;
    std::ostringstream csv;
    if (a.serial > 0) {
        const auto chunks = split_serial(src.cloud, a.serial);
        csv << "point,chunk\n";
        std::vector<std::size_t> sizes;
        for (std::size_t c = 0; c < chunks.size(); ++c) {
            sizes.push_back(chunks[c].size());
            for (auto i = chunks[c].begin; i < chunks[c].end; ++i) csv << i << ',' << c << '\n';
        }
        doc["mode"] = "serial";
        doc["points_per_chunk"] = a.serial;
        doc["chunks"] = chunks.size();
        doc["chunk_sizes"] = sizes;
    } else {
        if (a.grid.empty()) throw UsageFailure("split needs --grid or --serial");
        const auto grid = split_grid(src.cloud, parse_triple(a.grid, "--grid"), parse_triple(a.kernel, "--kernel"),
                                     parse_triple(a.stride, "--stride"));
        csv << "point,cell\n";
        for (std::size_t i = 0; i < grid.cell_of_point.size(); ++i) csv << i << ',' << grid.cell_of_point[i] << '\n';
        std::vector<std::size_t> cell_sizes, group_sizes;
        for (const auto& c : grid.cells) cell_sizes.push_back(c.size());
        for (std::size_t k = 0; k < grid.group_count(); ++k) group_sizes.push_back(grid.group_points(k).size());
        doc["mode"] = "grid";
        doc["dims"] = triple_json(grid.dims);
        doc["kernel"] = triple_json(grid.kernel);
        doc["stride"] = triple_json(grid.stride);
        doc["groups_per_axis"] = triple_json(grid.group_dims());
        doc["groups"] = grid.group_count();
        doc["cell_sizes"] = cell_sizes;
        doc["group_sizes"] = group_sizes;
    }
    if (!g.out.empty()) write_file(g.out, csv.str());
    out << doc.dump(2) << '\n';
    return Ok;
}

struct SortArgs {
    CloudArgs cloud;
    std::string axis = "z";
    std::size_t partitions = 1;
};

int cmd_sort(const SortArgs& a, const Globals& g, std::ostream& out) {
    const auto src = load(a.cloud, g);
    int axis = -1;
    if (a.axis == "x" || a.axis == "0") axis = 0;
    else if (a.axis == "y" || a.axis == "1") axis = 1;
    else if (a.axis == "z" || a.axis == "2") axis = 2;
    else throw UsageFailure("--axis must be x, y or z");
    const auto perm = chunked_sort(src.cloud, axis, even_boundaries(src.cloud, axis, a.partitions));
    const bool matches = perm == global_sort(src.cloud, axis);
    if (!g.out.empty()) {
        std::ostringstream text;
        for (auto i : perm) text << i << '\n';
        write_file(g.out, text.str());
    }
    ordered_json doc;
    doc["cloud"] = src.source;
    doc["axis"] = axis;
    doc["partitions"] = a.partitions;
    doc["matches_global_sort"] = matches;
    out << doc.dump(2) << '\n';
    return matches ? Ok : VerifyFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Line-buffer scheduling and point-cloud kernels"};
    app.name("pcstream");
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "seed for synthetic clouds and queries");
    app.add_option("--format", g.format, "point cloud file format")->check(CLI::IsMember({"text", "binary"}));
    app.add_option("--out", g.out, "output file");

    OptimizeArgs opt;
    auto* c_opt = app.add_subcommand("optimize", "minimize total line buffer for a pipeline");
    c_opt->add_option("graph", opt.graph, "pipeline JSON")->required();
    c_opt->add_flag("--no-prune", opt.no_prune, "keep every overwrite-window constraint");
    c_opt->add_option("--horizon", opt.horizon, "upper bound on start cycles")->check(CLI::NonNegativeNumber);
    c_opt->add_option("--chunks", opt.chunks, "extend to this many chunks")->check(CLI::PositiveNumber);
    c_opt->add_option("--element-bytes", opt.element_bytes, "bytes per buffered element")->check(CLI::PositiveNumber);

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "replay a schedule cycle by cycle");
    c_sim->add_option("graph", sim.graph, "pipeline JSON")->required();
    c_sim->add_option("schedule", sim.schedule, "schedule JSON")->required();
    c_sim->add_option("--chunks", sim.chunks, "chunk count")->check(CLI::PositiveNumber);
    c_sim->add_option("--trace", sim.trace, "occupancy CSV");
    c_sim->add_option("--trace-stride", sim.trace_stride, "keep every Nth cycle in the trace")->check(CLI::PositiveNumber);

    VerifyArgs ver;
    auto* c_ver = app.add_subcommand("verify", "compare the solver against exhaustive search");
    c_ver->add_option("graph", ver.graph, "pipeline JSON")->required();
    c_ver->add_option("--horizon", ver.horizon, "upper bound on start cycles")->check(CLI::NonNegativeNumber);

    SearchArgs knn;
    auto* c_knn = app.add_subcommand("knn", "k-nearest-neighbour search with an optional step deadline");
    knn.cloud.add_to(c_knn, true);
    c_knn->add_option("--k", knn.k, "neighbours per query")->check(CLI::PositiveNumber);
    auto* knn_dl = c_knn->add_option("--deadline", knn.deadline, "step cap or 'inf'");
    c_knn->add_option("--deadline-frac", knn.deadline_frac, "cap at this fraction of the profiled mean")
        ->check(CLI::Range(0.0, 1.0))
        ->excludes(knn_dl);
    c_knn->add_option("--banks", knn.banks, "search all queries in lock step over this many banks, eliding conflicts")
        ->check(CLI::PositiveNumber);

    SearchArgs rng;
    auto* c_rng = app.add_subcommand("range", "fixed-radius search with an optional step deadline");
    rng.cloud.add_to(c_rng, true);
    c_rng->add_option("--radius", rng.radius, "search radius");
    c_rng->add_option("--deadline", rng.deadline, "step cap or 'inf'");

    ProfileArgs prof;
    auto* c_prof = app.add_subcommand("profile-deadline", "recall against step deadlines from profiled traversals");
    prof.cloud.add_to(c_prof, true);
    c_prof->add_option("--k", prof.k, "neighbours per query")->check(CLI::PositiveNumber);
    c_prof->add_option("--fractions", prof.fractions, "deadline fractions of the mean")
        ->delimiter(',')
        ->check(CLI::Range(0.0, 1.0));

    ChunkStatsArgs stats;
    auto* c_stats = app.add_subcommand("stats-chunks", "mean grid cells touched per kNN query");
    stats.cloud.add_to(c_stats, true);
    c_stats->add_option("--grid", stats.grid, "cells per axis, e.g. 8x8x1");
    c_stats->add_option("--k", stats.ks, "k values; a single value sweeps powers of two up to it")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);

    SplitArgs split;
    auto* c_split = app.add_subcommand("split", "partition a cloud into grid cells or serial chunks");
    split.cloud.add_to(c_split, false);
    auto* sp_grid = c_split->add_option("--grid", split.grid, "cells per axis, e.g. 3x3x1");
    c_split->add_option("--kernel", split.kernel, "cells per chunk group");
    c_split->add_option("--stride", split.stride, "group stride in cells");
    c_split->add_option("--serial", split.serial, "points per chunk in arrival order")
        ->check(CLI::PositiveNumber)
        ->excludes(sp_grid);

    SortArgs sort;
    auto* c_sort = app.add_subcommand("sort", "sort along an axis chunk by chunk");
    sort.cloud.add_to(c_sort, false);
    c_sort->add_option("--axis", sort.axis, "x, y or z");
    c_sort->add_option("--partitions", sort.partitions, "equal-width slabs along the axis")->check(CLI::PositiveNumber);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? Ok : UsageError;
    }

    try {
        if (*c_opt) return cmd_optimize(opt, g, out);
        if (*c_sim) return cmd_simulate(sim, g, out, err);
        if (*c_ver) return cmd_verify(ver, g, out);
        if (*c_knn) return cmd_knn(knn, g, out, false);
        if (*c_rng) return cmd_knn(rng, g, out, true);
        if (*c_prof) return cmd_profile(prof, g, out);
        if (*c_stats) return cmd_stats_chunks(stats, g, out);
        if (*c_split) return cmd_split(split, g, out);
        if (*c_sort) return cmd_sort(sort, g, out);
    } catch (const ScheduleError& e) {
        err << "error: " << e.what() << '\n';
        return VerifyFailed;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return UsageError;
    }
    return UsageError;
}

}  // namespace pcstream::cli
