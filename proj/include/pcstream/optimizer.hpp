#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcstream/graph.hpp"
#include "pcstream/milp.hpp"
#include "pcstream/schedule.hpp"

namespace pcstream {

class ScheduleError : public std::runtime_error {
public:
    enum class Code { Infeasible, HorizonExhausted, NodeLimit };
    ScheduleError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const { return code_; }

private:
    Code code_;
};

struct BuildOptions {
    bool pruned = true;
    /// Upper bound on every start cycle; defaults to 4 * sum of stage durations.
    std::optional<std::int64_t> horizon;
};

std::int64_t default_horizon(const WorkMap& work);

/// Line-buffer minimization problem over integer start cycles.
struct ConstraintSystem {
    milp::Problem problem;
    bool pruned = true;
    std::int64_t horizon = 0;

    std::vector<std::size_t> start_var;      // per stage
    std::vector<std::size_t> buffer_var;     // per edge, LB_e in elements
    std::vector<std::size_t> overwrite_var;  // per edge, t_o
    /// per edge; only local edges carry a saturation indicator
    std::vector<std::optional<std::size_t>> saturated_var;

    std::size_t constraint_count() const { return problem.rows.size(); }
};

ConstraintSystem build_constraints(const PipelineGraph& graph, const WorkMap& work, const BuildOptions& options = {});

/// Minimal total line buffer; ties broken towards the lexicographically smallest start vector.
ScheduleSolution solve(const PipelineGraph& graph, const WorkMap& work, const ConstraintSystem& system);

/// Convenience: derive work, build the pruned system, solve, and record both constraint counts.
ScheduleSolution optimize(const PipelineGraph& graph, const BuildOptions& options = {});

/// Replicates a single-chunk schedule over `chunk_count` chunks at a fixed initiation interval.
ScheduleSolution schedule_chunks(const ScheduleSolution& solution, const PipelineGraph& graph, const WorkMap& work,
                                 std::size_t chunk_count);

/// Earliest start vector satisfying every dependency (longest path), ignoring buffer cost.
std::vector<std::int64_t> earliest_starts(const PipelineGraph& graph, const WorkMap& work);

/// Smallest consumer-minus-producer start offset that never starves the consumer.
std::int64_t min_edge_offset(const PipelineGraph& graph, const WorkMap& work, std::size_t edge);

/// Closed-form occupancy of `edge` during cycle t in scaled units (see edge_scale):
/// writes through the end of cycle t minus overwrites through the end of cycle t-1.
std::int64_t analytic_occupancy(const PipelineGraph& graph, const WorkMap& work, std::size_t edge,
                                std::int64_t producer_start, std::int64_t consumer_start, std::int64_t t);

std::int64_t makespan_of(const PipelineGraph& graph, const WorkMap& work, const std::vector<std::int64_t>& starts);

// ---------------------------------------------------------------------------
// Exhaustive cross-check

struct OracleReport {
    bool feasible = false;
    bool ilp_feasible = false;
    std::int64_t oracle_total = 0;
    std::int64_t ilp_total = 0;
    std::vector<std::int64_t> oracle_starts;
    std::uint64_t candidates = 0;  // start vectors reached by the enumeration
    bool match = false;
};

/// Enumerates start vectors in [0, horizon]^n, scores each by token simulation,
/// and compares the minimum with solve().
OracleReport verify_against_oracle(const PipelineGraph& graph, std::optional<std::int64_t> horizon = std::nullopt);

}  // namespace pcstream
