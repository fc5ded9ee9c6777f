#include <algorithm>
#include <limits>
#include <map>

#include "pcstream/optimizer.hpp"
#include "pcstream/simulator.hpp"

namespace pcstream {

namespace {

constexpr std::int64_t kInfeasible = std::numeric_limits<std::int64_t>::max();

/// Peak elements of one edge as a function of consumer-minus-producer offset,
/// measured by token simulation and memoized.
class EdgeCostTable {
public:
    EdgeCostTable(const PipelineGraph& graph, const WorkMap& work, std::size_t edge, std::int64_t horizon)
        : lo_(-horizon), costs_(static_cast<std::size_t>(2 * horizon + 1), kUnknown) {
        graph_ = &graph;
        work_ = &work;
        edge_ = edge;
    }

    std::int64_t cost(std::int64_t offset) {
        auto& slot = costs_[static_cast<std::size_t>(offset - lo_)];
        if (slot == kUnknown) {
            const std::int64_t producer = offset < 0 ? -offset : 0;
            const auto probe = simulate_edge(*graph_, *work_, edge_, producer, producer + offset);
            slot = probe.starved ? kInfeasible : probe.peak_elements;
        }
        return slot;
    }

    /// Smallest offset the consumer can run at without starving.
    std::int64_t min_offset() {
        for (std::int64_t d = lo_; d <= -lo_; ++d)
            if (cost(d) != kInfeasible) return d;
        return kInfeasible;
    }

    std::int64_t minimum() {
        if (min_ == kUnknown) {
            min_ = kInfeasible;
            for (std::int64_t d = lo_; d <= -lo_; ++d) min_ = std::min(min_, cost(d));
        }
        return min_;
    }

private:
    static constexpr std::int64_t kUnknown = -1;
    const PipelineGraph* graph_;
    const WorkMap* work_;
    std::size_t edge_;
    std::int64_t lo_;
    std::vector<std::int64_t> costs_;
    std::int64_t min_ = kUnknown;
};

struct Search {
    const PipelineGraph& graph;
    std::int64_t horizon;
    std::vector<EdgeCostTable>& tables;
    std::vector<std::size_t> order;
    std::vector<std::int64_t> min_offset;
    std::vector<std::int64_t> starts;
    std::int64_t best = kInfeasible;
    std::vector<std::int64_t> best_starts;
    std::uint64_t candidates = 0;

    std::vector<std::size_t> position;  // stage -> index in order
    std::vector<std::int64_t> earliest;  // scratch

    // Lower bound on the cost of every edge whose consumer comes after `depth`,
    // with stages up to `depth` placed. Unplaced stages get their earliest
    // feasible start; kInfeasible when one falls past the horizon.
    std::int64_t remaining_bound(std::size_t depth) {
        std::int64_t bound = 0;
        for (std::size_t k = depth + 1; k < order.size(); ++k) {
            const std::size_t stage = order[k];
            std::int64_t lb = 0;
            for (std::size_t e : graph.producer_edges(stage)) {
                const std::size_t p = graph.edges()[e].producer;
                const std::int64_t at = position[p] <= depth ? starts[p] : earliest[p];
                lb = std::max(lb, at + min_offset[e]);
            }
            if (lb > horizon) return kInfeasible;
            earliest[stage] = lb;
            for (std::size_t e : graph.producer_edges(stage)) {
                const std::size_t p = graph.edges()[e].producer;
                bound += position[p] <= depth ? tables[e].cost(lb - starts[p]) : tables[e].minimum();
            }
        }
        return bound;
    }

    void run(std::size_t depth, std::int64_t partial) {
        if (depth == order.size()) {
            ++candidates;
            if (partial < best) {
                best = partial;
                best_starts = starts;
            }
            return;
        }
        const std::size_t stage = order[depth];
        std::int64_t first = 0;
        for (std::size_t e : graph.producer_edges(stage))
            first = std::max(first, starts[graph.edges()[e].producer] + min_offset[e]);
        for (std::int64_t t = first; t <= horizon; ++t) {
            std::int64_t cost = partial;
            for (std::size_t e : graph.producer_edges(stage))
                cost += tables[e].cost(t - starts[graph.edges()[e].producer]);
            starts[stage] = t;
            // every term of the bound only grows with a later start, so nothing past here can win
            const std::int64_t rest = remaining_bound(depth);
            if (rest == kInfeasible || (best != kInfeasible && cost + rest >= best)) {
                ++candidates;
                break;
            }
            run(depth + 1, cost);
        }
    }
};

}  // namespace

OracleReport verify_against_oracle(const PipelineGraph& graph, std::optional<std::int64_t> horizon_override) {
    const WorkMap work = derive_work(graph);
    const std::int64_t horizon = horizon_override.value_or(default_horizon(work));

    OracleReport report;
    std::vector<EdgeCostTable> tables;
    for (std::size_t e = 0; e < graph.edge_count(); ++e) tables.emplace_back(graph, work, e, horizon);

    Search search{graph, horizon, tables, graph.topo_order(), {}, std::vector<std::int64_t>(graph.stage_count(), 0),
                  kInfeasible, {}, 0, std::vector<std::size_t>(graph.stage_count()),
                  std::vector<std::int64_t>(graph.stage_count(), 0)};
    for (std::size_t k = 0; k < search.order.size(); ++k) search.position[search.order[k]] = k;
    bool any_edge_impossible = false;
    for (auto& table : tables) {
        search.min_offset.push_back(table.min_offset());
        if (search.min_offset.back() == kInfeasible) any_edge_impossible = true;
    }
    if (!any_edge_impossible) search.run(0, 0);
    report.candidates = search.candidates;
    report.feasible = search.best != kInfeasible;
    if (report.feasible) {
        report.oracle_total = search.best;
        report.oracle_starts = search.best_starts;
    }

    try {
        BuildOptions options;
        options.horizon = horizon;
        const auto system = build_constraints(graph, work, options);
        const auto solution = solve(graph, work, system);
        report.ilp_feasible = true;
        report.ilp_total = solution.total_buffer;
    } catch (const ScheduleError&) {
        report.ilp_feasible = false;
    }
    report.match = report.feasible == report.ilp_feasible && (!report.feasible || report.oracle_total == report.ilp_total);
    return report;
}

}  // namespace pcstream
