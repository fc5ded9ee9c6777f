#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pcstream/rational.hpp"

namespace pcstream {

enum class StageKind { Elementwise, Stencil, Reduction, Global };

std::string_view to_string(StageKind kind);
std::optional<StageKind> parse_stage_kind(std::string_view text);

/// 2-D tensor shape: [points, attributes per point].
struct Shape {
    std::int64_t rows = 1;
    std::int64_t attrs = 1;

    std::int64_t elements() const { return rows * attrs; }
    friend bool operator==(const Shape&, const Shape&) = default;
};

struct StageSpec {
    std::string id;
    StageKind kind = StageKind::Elementwise;
    Shape i_shape;
    std::int64_t i_freq = 1;
    Shape o_shape;
    std::int64_t o_freq = 1;
    std::vector<std::int64_t> reuse{1, 1};
    std::int64_t depth = 0;  // pipelining stages before the first write

    bool is_global() const { return kind == StageKind::Global; }
    std::int64_t reuse_total() const;

    friend bool operator==(const StageSpec&, const StageSpec&) = default;
};

struct Edge {
    std::size_t producer = 0;
    std::size_t consumer = 0;
    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Elements per cycle: tau_in counts unique input elements (reuse factored out).
struct Throughputs {
    Rational tau_in;
    Rational tau_out;
};

Throughputs throughputs(const StageSpec& stage);

class GraphError : public std::runtime_error {
public:
    enum class Code { Syntax, Schema, UnknownKind, DanglingEdge, Cycle, NonIntegerWork, Invalid };

    GraphError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const { return code_; }

private:
    Code code_;
};

/// Ordered DAG of stages. Each edge carries one line buffer.
class PipelineGraph {
public:
    PipelineGraph() = default;
    PipelineGraph(std::vector<StageSpec> stages, std::vector<Edge> edges, std::int64_t input_work);

    const std::vector<StageSpec>& stages() const { return stages_; }
    const std::vector<Edge>& edges() const { return edges_; }
    std::int64_t input_work() const { return input_work_; }
    std::size_t stage_count() const { return stages_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    std::optional<std::size_t> find_stage(std::string_view id) const;
    std::vector<std::size_t> producer_edges(std::size_t stage) const;
    std::vector<std::size_t> consumer_edges(std::size_t stage) const;
    bool is_source(std::size_t stage) const { return producer_edges(stage).empty(); }

    /// Stage indices in dependency order; ties resolved by declaration index.
    const std::vector<std::size_t>& topo_order() const { return topo_; }

    PipelineGraph with_input_work(std::int64_t work) const;

    friend bool operator==(const PipelineGraph& a, const PipelineGraph& b) {
        return a.stages_ == b.stages_ && a.edges_ == b.edges_ && a.input_work_ == b.input_work_;
    }

private:
    void validate();

    std::vector<StageSpec> stages_;
    std::vector<Edge> edges_;
    std::int64_t input_work_ = 0;
    std::vector<std::size_t> topo_;
};

/// Derived per-stage volumes for one chunk.
struct StageWork {
    Rational unique_input;    // U_i
    std::int64_t work = 0;    // W_i, output elements
    std::int64_t duration = 0;  // D_i = U_i / tau_in = W_i / tau_out, cycles
    Throughputs rates;
};

struct WorkMap {
    std::vector<StageWork> stages;
    /// Unique elements per cycle the consumer drains from each edge (W_p / D_c).
    std::vector<Rational> edge_read_rate;

    const StageWork& operator[](std::size_t i) const { return stages[i]; }
};

WorkMap derive_work(const PipelineGraph& graph);

PipelineGraph parse_pipeline(std::string_view document);
PipelineGraph load_pipeline(const std::string& path);
std::string serialize_pipeline(const PipelineGraph& graph);

}  // namespace pcstream
