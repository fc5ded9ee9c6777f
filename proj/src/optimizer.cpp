#include "pcstream/optimizer.hpp"

#include <algorithm>
#include <numeric>

namespace pcstream {

using milp::Number;
using milp::Sense;
using milp::Term;

namespace {

struct EdgeRates {
    std::int64_t scale;   // L
    std::int64_t write;   // tau_out(p) * L per cycle
    std::int64_t read;    // edge read rate * L per cycle
    std::int64_t volume;  // W_p * L
};

EdgeRates edge_rates(const PipelineGraph& graph, const WorkMap& work, std::size_t e) {
    const auto& edge = graph.edges()[e];
    EdgeRates r;
    r.scale = edge_scale(graph, work, e);
    r.write = (work[edge.producer].rates.tau_out * Rational(r.scale)).num();
    r.read = (work.edge_read_rate[e] * Rational(r.scale)).num();
    r.volume = Rational::checked_mul(work[edge.producer].work, r.scale);
    return r;
}

Number q(std::int64_t v) { return Number(static_cast<long>(v)); }

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return Rational(a, b).ceil(); }

}  // namespace

std::int64_t default_horizon(const WorkMap& work) {
    std::int64_t total = 0;
    for (const auto& s : work.stages) total += s.duration;
    return 4 * total;
}

std::int64_t min_edge_offset(const PipelineGraph& graph, const WorkMap& work, std::size_t e) {
    const auto& edge = graph.edges()[e];
    const auto& producer = graph.stages()[edge.producer];
    if (graph.stages()[edge.consumer].is_global()) return producer.depth + work[edge.producer].duration;
    // reads through x cycles never outrun writes: x*r <= (delta + x - depth_p) * w for x in [1, D_c]
    const auto rates = edge_rates(graph, work, e);
    const std::int64_t dc = work[edge.consumer].duration;
    const std::int64_t first = producer.depth + ceil_div(rates.read - rates.write, rates.write);
    const std::int64_t last = producer.depth + ceil_div(dc * (rates.read - rates.write), rates.write);
    return std::max(first, last);
}

std::vector<std::int64_t> earliest_starts(const PipelineGraph& graph, const WorkMap& work) {
    std::vector<std::int64_t> start(graph.stage_count(), 0);
    for (std::size_t s : graph.topo_order()) {
        for (std::size_t e : graph.producer_edges(s))
            start[s] = std::max(start[s], start[graph.edges()[e].producer] + min_edge_offset(graph, work, e));
    }
    // sources with only late consumers stay at zero; shift so the earliest stage starts at 0
    const auto lo = *std::min_element(start.begin(), start.end());
    for (auto& v : start) v -= lo;
    return start;
}

std::int64_t analytic_occupancy(const PipelineGraph& graph, const WorkMap& work, std::size_t e,
                                std::int64_t producer_start, std::int64_t consumer_start, std::int64_t t) {
    const auto rates = edge_rates(graph, work, e);
    const auto& edge = graph.edges()[e];
    const auto timing = stage_timing(graph, work, edge.producer, producer_start);
    const std::int64_t t_o = overwrite_start(graph, work, e, consumer_start);
    const std::int64_t written = std::clamp((t + 1 - timing.write_start) * rates.write, std::int64_t{0}, rates.volume);
    const std::int64_t overwritten = std::clamp((t - t_o) * rates.read, std::int64_t{0}, rates.volume);
    return written - overwritten;
}

std::int64_t makespan_of(const PipelineGraph& graph, const WorkMap& work, const std::vector<std::int64_t>& starts) {
    std::int64_t first = starts.at(0), last = 0;
    for (std::size_t i = 0; i < graph.stage_count(); ++i) {
        const auto t = stage_timing(graph, work, i, starts[i]);
        first = std::min(first, t.start);
        last = std::max(last, t.write_end);
    }
    return last - first;
}

ConstraintSystem build_constraints(const PipelineGraph& graph, const WorkMap& work, const BuildOptions& options) {
    ConstraintSystem sys;
    sys.pruned = options.pruned;
    sys.horizon = options.horizon.value_or(default_horizon(work));
    if (sys.horizon < 0) throw ScheduleError(ScheduleError::Code::HorizonExhausted, "negative horizon");

    // Infeasibility shows up as a dependency chain longer than the horizon allows.
    const auto earliest = earliest_starts(graph, work);
    for (std::size_t i = 0; i < graph.stage_count(); ++i) {
        if (earliest[i] > sys.horizon)
            throw ScheduleError(ScheduleError::Code::HorizonExhausted,
                                "stage '" + graph.stages()[i].id + "' cannot start before cycle " +
                                    std::to_string(earliest[i]) + ", beyond horizon " + std::to_string(sys.horizon));
    }

    auto& p = sys.problem;
    const Number horizon = q(sys.horizon);
    for (const auto& s : graph.stages()) {
        sys.start_var.push_back(p.add_var("t_s[" + s.id + "]", 0, horizon));
        p.vars.back().priority = 1;
    }

    const std::size_t n_edges = graph.edge_count();
    sys.saturated_var.resize(n_edges);
    for (std::size_t e = 0; e < n_edges; ++e) {
        const auto& edge = graph.edges()[e];
        if (!graph.stages()[edge.consumer].is_global()) {
            sys.saturated_var[e] = p.add_var("z[" + std::to_string(e) + "]", 0, 1);
            p.vars.back().priority = 2;
        }
    }
    for (std::size_t e = 0; e < n_edges; ++e) {
        const auto& edge = graph.edges()[e];
        const std::int64_t slack = graph.stages()[edge.consumer].is_global() ? work[edge.consumer].duration : 0;
        sys.overwrite_var.push_back(p.add_var("t_o[" + std::to_string(e) + "]", 0, q(sys.horizon + slack)));
    }
    for (std::size_t e = 0; e < n_edges; ++e) {
        const auto& edge = graph.edges()[e];
        sys.buffer_var.push_back(p.add_var("LB[" + std::to_string(e) + "]", 0, q(work[edge.producer].work)));
    }

    for (std::size_t e = 0; e < n_edges; ++e) {
        const auto& edge = graph.edges()[e];
        const auto& prod = graph.stages()[edge.producer];
        const auto& cons = graph.stages()[edge.consumer];
        const std::int64_t dp = prod.depth;
        const std::int64_t Dp = work[edge.producer].duration;
        const std::int64_t Dc = work[edge.consumer].duration;
        const std::size_t sp = sys.start_var[edge.producer];
        const std::size_t sc = sys.start_var[edge.consumer];
        const std::size_t lb = sys.buffer_var[e];
        const std::size_t to = sys.overwrite_var[e];
        const std::string tag = prod.id + "->" + cons.id;

        if (cons.is_global()) {
            // everything the producer writes is in the buffer before the consumer starts
            p.add_row({{sc, 1}, {sp, -1}}, Sense::GreaterEqual, q(dp + Dp), "global-dep " + tag);
            p.add_row({{to, 1}, {sc, -1}}, Sense::GreaterEqual, q(Dc), "overwrite " + tag);
            const auto rates = edge_rates(graph, work, e);
            if (options.pruned) {
                p.add_row({{lb, 1}}, Sense::GreaterEqual, q(work[edge.producer].work), "buffer " + tag);
            } else {
                for (std::int64_t y = 0; y <= dp + Dp; ++y) {
                    const std::int64_t held = std::clamp((y + 1 - dp) * rates.write, std::int64_t{0}, rates.volume);
                    p.add_row({{lb, q(rates.scale)}}, Sense::GreaterEqual, q(held), "buffer@" + std::to_string(y) + " " + tag);
                }
            }
            continue;
        }

        const auto rates = edge_rates(graph, work, e);
        const std::int64_t L = rates.scale, w = rates.write, r = rates.read, WL = rates.volume;
        const std::size_t z = *sys.saturated_var[e];
        const std::int64_t to_max = sys.horizon;

        // demand never outruns supply: x*r <= (s_c + x - s_p - d_p) * w for x in [1, D_c]
        auto demand_row = [&](std::int64_t x) {
            p.add_row({{sc, q(w)}, {sp, q(-w)}}, Sense::GreaterEqual, q(x * r - x * w + dp * w),
                      "dep@" + std::to_string(x) + " " + tag);
        };
        if (options.pruned) {
            demand_row(1);
            if (Dc > 1) demand_row(Dc);
        } else {
            for (std::int64_t x = 1; x <= Dc; ++x) demand_row(x);
        }

        p.add_row({{to, 1}, {sc, -1}}, Sense::GreaterEqual, 0, "overwrite " + tag);

        // Occupancy u cycles before the last write:
        //   L*LB >= WL - u*w - (t_e - 1 - u - t_o) * r
        auto backward_row = [&](std::int64_t u) {
            const std::int64_t rhs = WL - u * w - (dp + Dp - 1 - u) * r;
            const std::int64_t big_m = std::max<std::int64_t>(0, rhs + r * to_max);
            p.add_row({{lb, q(L)}, {sp, q(r)}, {to, q(-r)}, {z, q(big_m)}}, Sense::GreaterEqual, q(rhs),
                      "buffer-end@" + std::to_string(u) + " " + tag);
        };
        // Occupancy v cycles after overwriting starts:
        //   L*LB >= (t_o + v + 1 - t_w) * w - v*r
        auto forward_row = [&](std::int64_t v) {
            const std::int64_t rhs = (v + 1 - dp) * w - v * r;
            const std::int64_t big_m = std::max<std::int64_t>(0, rhs + w * to_max);
            p.add_row({{lb, q(L)}, {to, q(-w)}, {sp, q(w)}, {z, q(big_m)}}, Sense::GreaterEqual, q(rhs),
                      "buffer-overwrite@" + std::to_string(v) + " " + tag);
        };
        if (options.pruned) {
            forward_row(0);
            backward_row(0);
        } else if (r <= w) {
            for (std::int64_t u = 0; u <= dp + Dp; ++u) backward_row(u);
            forward_row(0);
        } else {
            for (std::int64_t v = 0; v <= dp + Dp; ++v) forward_row(v);
            backward_row(0);
        }

        // z = 0 keeps overwriting inside the write window; z = 1 pays for a full buffer
        const std::int64_t window_m = std::max<std::int64_t>(0, to_max - (dp + Dp - 1));
        p.add_row({{to, 1}, {sp, -1}, {z, q(-window_m)}}, Sense::LessEqual, q(dp + Dp - 1), "window " + tag);
        p.add_row({{lb, 1}, {z, q(-work[edge.producer].work)}}, Sense::GreaterEqual, 0, "saturated " + tag);
    }

    for (std::size_t e = 0; e < n_edges; ++e) p.objective.push_back({sys.buffer_var[e], 1});
    return sys;
}

namespace {

milp::Result run_milp(const milp::Problem& problem, std::vector<Number> incumbent) {
    milp::Options opts;
    opts.integral_objective = true;
    opts.incumbent = std::move(incumbent);
    auto res = milp::solve_milp(problem, opts);
    if (res.status == milp::Status::NodeLimit)
        throw ScheduleError(ScheduleError::Code::NodeLimit, "branch-and-bound node limit reached");
    return res;
}

void fix(milp::Problem& problem, std::size_t var, const Number& value) {
    problem.vars[var].lower = value;
    problem.vars[var].upper = value;
}

// Completes a start vector into a full feasible point (cheapest buffers for those starts).
std::vector<Number> point_for_starts(const ConstraintSystem& system, const std::vector<std::int64_t>& starts) {
    milp::Problem fixed = system.problem;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        if (starts[i] > system.horizon) return {};
        fix(fixed, system.start_var[i], q(starts[i]));
    }
    auto res = run_milp(fixed, {});
    if (res.status != milp::Status::Optimal) return {};
    return res.values;
}

}  // namespace

ScheduleSolution solve(const PipelineGraph& graph, const WorkMap& work, const ConstraintSystem& system) {
    auto best = run_milp(system.problem, point_for_starts(system, earliest_starts(graph, work)));
    if (best.status != milp::Status::Optimal)
        throw ScheduleError(ScheduleError::Code::Infeasible, "line-buffer system is infeasible");

    ScheduleSolution out;
    out.horizon = system.horizon;
    out.solver_nodes = best.nodes;

    // lexicographically smallest start vector among optima, one stage at a time
    milp::Problem lex = system.problem;
    std::vector<Term> total;
    for (auto v : system.buffer_var) total.push_back({v, 1});
    lex.add_row(std::move(total), Sense::LessEqual, best.objective, "optimal total");
    for (std::size_t i = 0; i < graph.stage_count(); ++i) {
        const std::size_t var = system.start_var[i];
        lex.objective = {{var, 1}};
        auto step = run_milp(lex, best.values);
        if (step.status != milp::Status::Optimal)
            throw ScheduleError(ScheduleError::Code::Infeasible, "tie-break pass lost the optimum");
        out.solver_nodes += step.nodes;
        fix(lex, var, step.values[var]);
        best.values = std::move(step.values);
    }
    for (auto v : system.start_var) out.start_cycles.push_back(best.values[v].get_num().get_si());
    for (auto v : system.buffer_var) out.buffer_sizes.push_back(best.values[v].get_num().get_si());
    out.total_buffer = std::accumulate(out.buffer_sizes.begin(), out.buffer_sizes.end(), std::int64_t{0});
    out.makespan = makespan_of(graph, work, out.start_cycles);
    out.chunk_count = 1;
    out.initiation_interval = 0;
    for (const auto& s : work.stages) out.initiation_interval = std::max(out.initiation_interval, s.duration);
    out.bubbles.assign(graph.stage_count(), std::vector<std::int64_t>{0});
    (system.pruned ? out.constraints_pruned : out.constraints_unpruned) = system.constraint_count();
    return out;
}

ScheduleSolution optimize(const PipelineGraph& graph, const BuildOptions& options) {
    const WorkMap work = derive_work(graph);
    BuildOptions pruned = options;
    pruned.pruned = true;
    BuildOptions unpruned = options;
    unpruned.pruned = false;
    const auto sys = build_constraints(graph, work, options);
    auto out = solve(graph, work, sys);
    out.constraints_pruned = build_constraints(graph, work, pruned).constraint_count();
    out.constraints_unpruned = build_constraints(graph, work, unpruned).constraint_count();
    return out;
}

ScheduleSolution schedule_chunks(const ScheduleSolution& solution, const PipelineGraph& graph, const WorkMap& work,
                                 std::size_t chunk_count) {
    if (chunk_count < 1) throw std::invalid_argument("chunk_count must be at least 1");
    ScheduleSolution out = solution;
    std::int64_t interval = 0;
    for (const auto& s : work.stages) interval = std::max(interval, s.duration);
    // a buffer must drain one chunk before the next chunk's first write lands
    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
        const auto& edge = graph.edges()[e];
        const auto prod = stage_timing(graph, work, edge.producer, solution.start_cycles[edge.producer]);
        const std::int64_t drained =
            overwrite_start(graph, work, e, solution.start_cycles[edge.consumer]) + work[edge.consumer].duration;
        interval = std::max(interval, drained - prod.write_start);
    }
    out.chunk_count = chunk_count;
    out.initiation_interval = interval;
    out.bubbles.assign(graph.stage_count(), {});
    for (std::size_t i = 0; i < graph.stage_count(); ++i) {
        out.bubbles[i].assign(chunk_count, interval - work[i].duration);
        out.bubbles[i][0] = 0;
    }
    out.makespan = solution.makespan + static_cast<std::int64_t>(chunk_count - 1) * interval;
    return out;
}

}  // namespace pcstream
