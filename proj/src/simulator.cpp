#include "pcstream/simulator.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

namespace pcstream {

namespace {

struct Window {
    std::int64_t begin = 0;
    std::int64_t end = 0;  // exclusive
    bool contains(std::int64_t t) const { return begin <= t && t < end; }
};

struct ChunkWindows {
    Window write;  // producer writes
    Window read;   // consumer reads
    Window free;   // consumer overwrites
};

/// Token movement on one edge across any number of chunks.
class EdgeEngine {
public:
    EdgeEngine(const PipelineGraph& graph, const WorkMap& work, std::size_t edge) : edge_(edge) {
        const auto& e = graph.edges()[edge];
        scale_ = edge_scale(graph, work, edge);
        write_ = (work[e.producer].rates.tau_out * Rational(scale_)).num();
        read_ = (work.edge_read_rate[edge] * Rational(scale_)).num();
        volume_ = work[e.producer].work * scale_;
        global_ = graph.stages()[e.consumer].is_global();
    }

    void add_chunk(const StageTiming& producer, const StageTiming& consumer, std::int64_t overwrite, std::int64_t read_cycles) {
        ChunkWindows w;
        w.write = {producer.write_start, producer.write_end};
        w.read = {consumer.start, consumer.start + read_cycles};
        w.free = {overwrite, overwrite + read_cycles};
        chunks_.push_back(w);
        written_.push_back(0);
        read_count_.push_back(0);
        freed_.push_back(0);
    }

    std::int64_t first_cycle() const {
        std::int64_t t = std::numeric_limits<std::int64_t>::max();
        for (const auto& c : chunks_) t = std::min({t, c.write.begin, c.read.begin});
        return t;
    }
    std::int64_t last_cycle() const {
        std::int64_t t = std::numeric_limits<std::int64_t>::min();
        for (const auto& c : chunks_) t = std::max({t, c.write.end, c.read.end, c.free.end});
        return t;
    }

    /// Advances one cycle; returns scaled occupancy seen during the cycle and
    /// reports starved chunks through `starved`.
    template <typename OnStarve>
    std::int64_t step(std::int64_t t, OnStarve&& starved) {
        std::int64_t occupancy = 0;
        for (std::size_t k = 0; k < chunks_.size(); ++k) {
            const auto& w = chunks_[k];
            if (w.write.contains(t)) {
                written_[k] += write_;
                total_written_ += write_;
            }
            if (w.read.contains(t)) {
                if (global_) {
                    // a global consumer needs every token from earlier cycles
                    const std::int64_t before = written_[k] - (w.write.contains(t) ? write_ : 0);
                    if (t == w.read.begin && before < volume_) starved(k);
                } else {
                    read_count_[k] += read_;
                    if (read_count_[k] > written_[k]) starved(k);
                }
            }
            occupancy += written_[k] - freed_[k];
        }
        for (std::size_t k = 0; k < chunks_.size(); ++k) {
            if (chunks_[k].free.contains(t)) {
                freed_[k] += read_;
                total_freed_ += read_;
            }
        }
        return occupancy;
    }

    std::int64_t to_elements(std::int64_t scaled) const { return (scaled + scale_ - 1) / scale_; }
    std::int64_t total_written() const { return total_written_; }
    std::int64_t total_freed() const { return total_freed_; }
    std::size_t edge() const { return edge_; }

private:
    std::size_t edge_;
    std::int64_t scale_ = 1, write_ = 0, read_ = 0, volume_ = 0;
    bool global_ = false;
    std::vector<ChunkWindows> chunks_;
    std::vector<std::int64_t> written_, read_count_, freed_;
    std::int64_t total_written_ = 0, total_freed_ = 0;
};

EdgeEngine single_chunk_engine(const PipelineGraph& graph, const WorkMap& work, std::size_t edge,
                               std::int64_t producer_start, std::int64_t consumer_start) {
    const auto& e = graph.edges()[edge];
    EdgeEngine engine(graph, work, edge);
    engine.add_chunk(stage_timing(graph, work, e.producer, producer_start),
                     stage_timing(graph, work, e.consumer, consumer_start),
                     overwrite_start(graph, work, edge, consumer_start), work[e.consumer].duration);
    return engine;
}

}  // namespace

SimTrace simulate(const PipelineGraph& graph, const WorkMap& work, const ScheduleSolution& solution,
                  std::size_t chunk_count) {
    if (chunk_count < 1) throw std::invalid_argument("chunk_count must be at least 1");
    if (solution.start_cycles.size() != graph.stage_count())
        throw std::invalid_argument("schedule does not cover every stage");

    const std::size_t n = graph.stage_count();
    std::vector<std::vector<StageTiming>> timing(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < chunk_count; ++k)
            timing[i].push_back(stage_timing(graph, work, i, solution.chunk_start(work, i, k)));

    std::vector<EdgeEngine> engines;
    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
        const auto& edge = graph.edges()[e];
        EdgeEngine engine(graph, work, e);
        for (std::size_t k = 0; k < chunk_count; ++k) {
            engine.add_chunk(timing[edge.producer][k], timing[edge.consumer][k],
                             overwrite_start(graph, work, e, timing[edge.consumer][k].start), work[edge.consumer].duration);
        }
        engines.push_back(std::move(engine));
    }

    SimTrace trace;
    std::int64_t first = std::numeric_limits<std::int64_t>::max();
    std::int64_t last = std::numeric_limits<std::int64_t>::min();
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& t : timing[i]) {
            first = std::min(first, t.start);
            last = std::max(last, t.write_end);
        }
    }
    for (const auto& engine : engines) {
        first = std::min(first, engine.first_cycle());
        last = std::max(last, engine.last_cycle());
    }

    trace.first_cycle = first;
    trace.occupancy.assign(engines.size(), {});
    trace.first_read.assign(n, std::nullopt);
    trace.first_write.assign(n, std::nullopt);
    trace.chunk_completion.assign(chunk_count, 0);

    for (std::int64_t t = first; t < last; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto& c0 = timing[i][0];
            if (!trace.first_read[i] && c0.start <= t && t < c0.read_end) trace.first_read[i] = t;
            if (!trace.first_write[i] && c0.write_start <= t && t < c0.write_end) trace.first_write[i] = t;
        }
        for (auto& engine : engines) {
            const std::size_t e = engine.edge();
            const std::size_t consumer = graph.edges()[e].consumer;
            const std::int64_t scaled = engine.step(t, [&](std::size_t chunk) {
                trace.stalls.push_back({t, consumer, chunk, "input from '" + graph.stages()[graph.edges()[e].producer].id +
                                                                 "' not yet available"});
            });
            const std::int64_t elements = engine.to_elements(scaled);
            trace.occupancy[e].push_back(elements);
            if (e < solution.buffer_sizes.size() && elements > solution.buffer_sizes[e])
                trace.overflows.push_back({t, e, elements, solution.buffer_sizes[e]});
        }
    }

    for (std::size_t k = 0; k < chunk_count; ++k)
        for (std::size_t i = 0; i < n; ++i)
            trace.chunk_completion[k] = std::max(trace.chunk_completion[k], timing[i][k].write_end);
    trace.completion_cycle = *std::max_element(trace.chunk_completion.begin(), trace.chunk_completion.end());
    for (const auto& engine : engines) {
        trace.tokens_written.push_back(engine.total_written());
        trace.tokens_freed.push_back(engine.total_freed());
    }
    return trace;
}

std::vector<std::int64_t> peak_occupancy(const SimTrace& trace) {
    std::vector<std::int64_t> peaks;
    for (const auto& series : trace.occupancy)
        peaks.push_back(series.empty() ? 0 : *std::max_element(series.begin(), series.end()));
    return peaks;
}

EdgeProbe simulate_edge(const PipelineGraph& graph, const WorkMap& work, std::size_t edge,
                        std::int64_t producer_start, std::int64_t consumer_start) {
    auto engine = single_chunk_engine(graph, work, edge, producer_start, consumer_start);
    EdgeProbe probe;
    std::int64_t peak = 0;
    for (std::int64_t t = engine.first_cycle(); t < engine.last_cycle(); ++t)
        peak = std::max(peak, engine.step(t, [&](std::size_t) { probe.starved = true; }));
    probe.peak_elements = engine.to_elements(peak);
    return probe;
}

std::vector<std::int64_t> simulate_edge_scaled(const PipelineGraph& graph, const WorkMap& work, std::size_t edge,
                                               std::int64_t producer_start, std::int64_t consumer_start,
                                               std::int64_t first_cycle, std::int64_t last_cycle) {
    auto engine = single_chunk_engine(graph, work, edge, producer_start, consumer_start);
    std::vector<std::int64_t> out;
    for (std::int64_t t = first_cycle; t < last_cycle; ++t) out.push_back(engine.step(t, [](std::size_t) {}));
    return out;
}

std::string trace_csv(const PipelineGraph& graph, const SimTrace& trace, std::int64_t stride) {
    if (stride < 1) stride = 1;
    std::ostringstream os;
    os << "cycle,edge,occupancy\n";
    for (std::size_t e = 0; e < trace.occupancy.size(); ++e) {
        const auto& edge = graph.edges()[e];
        const std::string name = graph.stages()[edge.producer].id + "->" + graph.stages()[edge.consumer].id;
        const auto& series = trace.occupancy[e];
        for (std::size_t i = 0; i < series.size(); ++i) {
            if (static_cast<std::int64_t>(i) % stride != 0 && i + 1 != series.size()) continue;
            os << trace.first_cycle + static_cast<std::int64_t>(i) << ',' << name << ',' << series[i] << '\n';
        }
    }
    return os.str();
}

std::string trace_summary_json(const PipelineGraph& graph, const SimTrace& trace, const ScheduleSolution& solution) {
    using nlohmann::json;
    json doc;
    const auto peaks = peak_occupancy(trace);
    doc["peaks"] = peaks;
    json edges = json::array();
    for (std::size_t e = 0; e < peaks.size(); ++e) {
        const auto& edge = graph.edges()[e];
        edges.push_back({{"producer", graph.stages()[edge.producer].id},
                         {"consumer", graph.stages()[edge.consumer].id},
                         {"peak", peaks[e]},
                         {"capacity", e < solution.buffer_sizes.size() ? solution.buffer_sizes[e] : 0}});
    }
    doc["edges"] = std::move(edges);
    json stalls = json::array();
    for (const auto& s : trace.stalls)
        stalls.push_back({{"cycle", s.cycle}, {"stage", graph.stages()[s.stage].id}, {"chunk", s.chunk}, {"cause", s.cause}});
    doc["stalls"] = std::move(stalls);
    json overflows = json::array();
    for (const auto& o : trace.overflows)
        overflows.push_back({{"cycle", o.cycle}, {"edge", o.edge}, {"occupancy", o.occupancy}, {"capacity", o.capacity}});
    doc["overflows"] = std::move(overflows);
    doc["completion_cycle"] = trace.completion_cycle;
    doc["chunk_completion"] = trace.chunk_completion;
    json intervals = json::array();
    for (std::size_t k = 1; k < trace.chunk_completion.size(); ++k)
        intervals.push_back(trace.chunk_completion[k] - trace.chunk_completion[k - 1]);
    doc["chunk_intervals"] = std::move(intervals);
    doc["initiation_interval"] = solution.initiation_interval;
    doc["verdict"] = trace.clean() ? "ok" : "violation";
    return doc.dump(2) + "\n";
}

std::vector<bool> arbitrate(const std::vector<std::optional<std::int64_t>>& requests, const BankModel& model) {
    if (model.bank_count < 1) throw std::invalid_argument("bank_count must be positive");
    std::map<std::int64_t, std::int64_t> owner;  // bank -> element granted this cycle
    std::vector<bool> granted(requests.size(), false);
    for (std::size_t a = 0; a < requests.size(); ++a) {
        if (!requests[a]) continue;
        const auto [it, fresh] = owner.try_emplace(model.bank_of(*requests[a]), *requests[a]);
        granted[a] = fresh || it->second == *requests[a];
    }
    return granted;
}

BankedRun simulate_banked(const std::vector<std::vector<std::int64_t>>& accesses, const BankModel& model,
                          ConflictPolicy policy) {
    if (model.bank_count < 1) throw std::invalid_argument("bank_count must be positive");
    BankedRun run;
    std::vector<std::size_t> cursor(accesses.size(), 0);
    std::int64_t cycle = 0;
    for (;;) {
        std::vector<std::optional<std::int64_t>> requests(accesses.size());
        bool any = false;
        for (std::size_t a = 0; a < accesses.size(); ++a) {
            if (cursor[a] >= accesses[a].size()) continue;
            requests[a] = accesses[a][cursor[a]];
            any = true;
        }
        if (!any) break;
        const auto granted = arbitrate(requests, model);
        for (std::size_t a = 0; a < accesses.size(); ++a) {
            if (!requests[a]) continue;
            run.log.push_back({cycle, a, *requests[a], granted[a]});
            if (granted[a] || policy == ConflictPolicy::Elide) ++cursor[a];
            if (!granted[a]) ++run.denied;
        }
        ++cycle;
    }
    run.cycles = cycle;
    return run;
}

}  // namespace pcstream
