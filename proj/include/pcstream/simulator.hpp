#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pcstream/graph.hpp"
#include "pcstream/schedule.hpp"

namespace pcstream {

struct StallEvent {
    std::int64_t cycle;
    std::size_t stage;
    std::size_t chunk;
    std::string cause;
};

struct OverflowEvent {
    std::int64_t cycle;
    std::size_t edge;
    std::int64_t occupancy;
    std::int64_t capacity;
};

/// Token-level record of one run. Occupancy is in elements; a partially
/// written element already holds its slot.
struct SimTrace {
    std::int64_t first_cycle = 0;
    /// occupancy[edge][cycle - first_cycle]
    std::vector<std::vector<std::int64_t>> occupancy;
    std::vector<StallEvent> stalls;
    std::vector<OverflowEvent> overflows;
    std::int64_t completion_cycle = 0;

    /// per stage, chunk 0: first cycle with a read / a write
    std::vector<std::optional<std::int64_t>> first_read;
    std::vector<std::optional<std::int64_t>> first_write;
    /// cycle after the last write of each chunk, over all stages
    std::vector<std::int64_t> chunk_completion;
    /// per edge, scaled token totals over the run
    std::vector<std::int64_t> tokens_written;
    std::vector<std::int64_t> tokens_freed;

    bool clean() const { return stalls.empty() && overflows.empty(); }
};

SimTrace simulate(const PipelineGraph& graph, const WorkMap& work, const ScheduleSolution& solution,
                  std::size_t chunk_count = 1);

std::vector<std::int64_t> peak_occupancy(const SimTrace& trace);

/// Single-edge, single-chunk probe used by the exhaustive oracle.
struct EdgeProbe {
    bool starved = false;
    std::int64_t peak_elements = 0;
};

EdgeProbe simulate_edge(const PipelineGraph& graph, const WorkMap& work, std::size_t edge,
                        std::int64_t producer_start, std::int64_t consumer_start);

/// Scaled occupancy of one edge at every cycle of a single-chunk run, for cross-checks.
std::vector<std::int64_t> simulate_edge_scaled(const PipelineGraph& graph, const WorkMap& work, std::size_t edge,
                                               std::int64_t producer_start, std::int64_t consumer_start,
                                               std::int64_t first_cycle, std::int64_t last_cycle);

/// CSV rows "cycle,edge,occupancy" every `stride` cycles (the last cycle is always kept).
std::string trace_csv(const PipelineGraph& graph, const SimTrace& trace, std::int64_t stride = 1);
std::string trace_summary_json(const PipelineGraph& graph, const SimTrace& trace, const ScheduleSolution& solution);

// ---------------------------------------------------------------------------
// Banked single-port memory

struct BankModel {
    std::int64_t bank_count = 1;
    std::int64_t bank_of(std::int64_t element) const { return ((element % bank_count) + bank_count) % bank_count; }
};

enum class ConflictPolicy { Stall, Elide };

struct BankGrant {
    std::int64_t cycle;
    std::size_t agent;
    std::int64_t element;
    bool granted;
};

struct BankedRun {
    std::vector<BankGrant> log;
    std::int64_t cycles = 0;
    std::size_t denied = 0;
};

/// One arbitration round: requests[a] is agent a's element this cycle, if any.
/// Agents asking for the same element share the grant.
std::vector<bool> arbitrate(const std::vector<std::optional<std::int64_t>>& requests, const BankModel& model);

/// Each agent issues its element stream in order, one request per cycle.
/// Same-bank requests for different elements conflict; the lowest agent index wins.
/// A denied agent retries next cycle (Stall) or drops that request (Elide).
BankedRun simulate_banked(const std::vector<std::vector<std::int64_t>>& accesses, const BankModel& model,
                          ConflictPolicy policy);

}  // namespace pcstream
