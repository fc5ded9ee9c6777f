#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pcstream/graph.hpp"

namespace pcstream {

/// Optimized schedule for one chunk, optionally extended to several chunks.
struct ScheduleSolution {
    std::vector<std::int64_t> start_cycles;  // per stage
    std::vector<std::int64_t> buffer_sizes;  // per edge, elements
    std::int64_t total_buffer = 0;
    std::int64_t makespan = 0;
    std::int64_t horizon = 0;

    std::size_t chunk_count = 1;
    std::int64_t initiation_interval = 0;
    /// bubbles[stage][chunk]: idle cycles inserted before that chunk's reads.
    std::vector<std::vector<std::int64_t>> bubbles;

    std::size_t constraints_pruned = 0;
    std::size_t constraints_unpruned = 0;
    std::size_t solver_nodes = 0;

    /// First read cycle of a stage for the given chunk.
    std::int64_t chunk_start(const WorkMap& work, std::size_t stage, std::size_t chunk) const;

    friend bool operator==(const ScheduleSolution&, const ScheduleSolution&) = default;
};

/// Per-stage timing of a single chunk; all values are cycles.
struct StageTiming {
    std::int64_t start = 0;        // t_s: first read
    std::int64_t write_start = 0;  // t_w = t_s + depth
    std::int64_t write_end = 0;    // t_e = t_w + D (exclusive)
    std::int64_t read_end = 0;     // t_s + D (exclusive)
};

StageTiming stage_timing(const PipelineGraph& graph, const WorkMap& work, std::size_t stage, std::int64_t start);

/// Cycle at which the consumer of `edge` begins freeing (overwriting) it:
/// consumer start for local consumers, consumer read completion for global ones.
std::int64_t overwrite_start(const PipelineGraph& graph, const WorkMap& work, std::size_t edge,
                             std::int64_t consumer_start);

/// Common scale that turns the edge's write and read rates into integers.
std::int64_t edge_scale(const PipelineGraph& graph, const WorkMap& work, std::size_t edge);

std::string schedule_to_json(const PipelineGraph& graph, const ScheduleSolution& solution,
                             std::int64_t element_bytes = 0);
ScheduleSolution schedule_from_json(const PipelineGraph& graph, const std::string& document);

}  // namespace pcstream
