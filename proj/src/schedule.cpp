#include "pcstream/schedule.hpp"

#include <json.hpp>

namespace pcstream {

using nlohmann::json;

std::int64_t ScheduleSolution::chunk_start(const WorkMap& work, std::size_t stage, std::size_t chunk) const {
    std::int64_t t = start_cycles.at(stage);
    for (std::size_t k = 1; k <= chunk; ++k) {
        const std::int64_t bubble = stage < bubbles.size() && k < bubbles[stage].size() ? bubbles[stage][k] : 0;
        t += work[stage].duration + bubble;
    }
    return t;
}

StageTiming stage_timing(const PipelineGraph& graph, const WorkMap& work, std::size_t stage, std::int64_t start) {
    StageTiming t;
    t.start = start;
    t.write_start = start + graph.stages()[stage].depth;
    t.write_end = t.write_start + work[stage].duration;
    t.read_end = start + work[stage].duration;
    return t;
}

std::int64_t overwrite_start(const PipelineGraph& graph, const WorkMap& work, std::size_t edge,
                             std::int64_t consumer_start) {
    const std::size_t c = graph.edges()[edge].consumer;
    return graph.stages()[c].is_global() ? consumer_start + work[c].duration : consumer_start;
}

std::int64_t edge_scale(const PipelineGraph& graph, const WorkMap& work, std::size_t edge) {
    const auto& e = graph.edges()[edge];
    return checked_lcm(work[e.producer].rates.tau_out.den(), work.edge_read_rate[edge].den());
}

std::string schedule_to_json(const PipelineGraph& graph, const ScheduleSolution& s, std::int64_t element_bytes) {
    json doc;
    json starts = json::object();
    for (std::size_t i = 0; i < graph.stage_count(); ++i) starts[graph.stages()[i].id] = s.start_cycles[i];
    doc["start_cycles"] = starts;

    json buffers = json::array();
    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
        const auto& edge = graph.edges()[e];
        json entry{{"producer", graph.stages()[edge.producer].id},
                   {"consumer", graph.stages()[edge.consumer].id},
                   {"elements", s.buffer_sizes[e]}};
        if (element_bytes > 0) entry["bytes"] = s.buffer_sizes[e] * element_bytes;
        buffers.push_back(std::move(entry));
    }
    doc["buffer_sizes"] = std::move(buffers);
    doc["total_buffer"] = s.total_buffer;
    if (element_bytes > 0) {
        doc["total_buffer_bytes"] = s.total_buffer * element_bytes;
        doc["element_bytes"] = element_bytes;
    }
    doc["makespan"] = s.makespan;
    doc["horizon"] = s.horizon;
    doc["chunk_count"] = s.chunk_count;
    doc["initiation_interval"] = s.initiation_interval;
    json bubbles = json::object();
    for (std::size_t i = 0; i < graph.stage_count() && i < s.bubbles.size(); ++i)
        bubbles[graph.stages()[i].id] = s.bubbles[i];
    doc["bubbles"] = std::move(bubbles);
    doc["constraints"] = {{"pruned", s.constraints_pruned}, {"unpruned", s.constraints_unpruned}};
    return doc.dump(2) + "\n";
}

ScheduleSolution schedule_from_json(const PipelineGraph& graph, const std::string& document) {
    const json doc = json::parse(document);
    ScheduleSolution s;
    const auto& starts = doc.at("start_cycles");
    for (const auto& stage : graph.stages()) {
        if (!starts.contains(stage.id))
            throw std::invalid_argument("schedule has no start cycle for stage '" + stage.id + "'");
        s.start_cycles.push_back(starts.at(stage.id).get<std::int64_t>());
    }
    const auto& buffers = doc.at("buffer_sizes");
    if (buffers.size() != graph.edge_count()) throw std::invalid_argument("schedule edge count does not match graph");
    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
        const auto& entry = buffers[e];
        const auto& edge = graph.edges()[e];
        if (entry.at("producer").get<std::string>() != graph.stages()[edge.producer].id ||
            entry.at("consumer").get<std::string>() != graph.stages()[edge.consumer].id)
            throw std::invalid_argument("schedule buffer " + std::to_string(e) + " does not match graph edge");
        s.buffer_sizes.push_back(entry.at("elements").get<std::int64_t>());
    }
    s.total_buffer = doc.at("total_buffer").get<std::int64_t>();
    s.makespan = doc.value("makespan", std::int64_t{0});
    s.horizon = doc.value("horizon", std::int64_t{0});
    s.chunk_count = doc.value("chunk_count", std::size_t{1});
    s.initiation_interval = doc.value("initiation_interval", std::int64_t{0});
    if (doc.contains("bubbles")) {
        for (const auto& stage : graph.stages())
            s.bubbles.push_back(doc["bubbles"].value(stage.id, std::vector<std::int64_t>{}));
    }
    if (doc.contains("constraints")) {
        s.constraints_pruned = doc["constraints"].value("pruned", std::size_t{0});
        s.constraints_unpruned = doc["constraints"].value("unpruned", std::size_t{0});
    }
    return s;
}

}  // namespace pcstream
