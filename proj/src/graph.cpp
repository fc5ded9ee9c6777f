#include "pcstream/graph.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

namespace pcstream {

using nlohmann::json;

std::string_view to_string(StageKind kind) {
    switch (kind) {
        case StageKind::Elementwise: return "elementwise";
        case StageKind::Stencil: return "stencil";
        case StageKind::Reduction: return "reduction";
        case StageKind::Global: return "global";
    }
    return "?";
}

std::optional<StageKind> parse_stage_kind(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "elementwise") return StageKind::Elementwise;
    if (lower == "stencil") return StageKind::Stencil;
    if (lower == "reduction") return StageKind::Reduction;
    if (lower == "global" || lower == "global_op") return StageKind::Global;
    return std::nullopt;
}

std::int64_t StageSpec::reuse_total() const {
    std::int64_t total = 1;
    for (auto r : reuse) total = Rational::checked_mul(total, r);
    return total;
}

Throughputs throughputs(const StageSpec& stage) {
    const std::int64_t beta = stage.kind == StageKind::Stencil ? stage.reuse_total() : 1;
    return Throughputs{
        Rational(stage.i_shape.elements(), Rational::checked_mul(beta, stage.i_freq)),
        Rational(stage.o_shape.elements(), stage.o_freq),
    };
}

PipelineGraph::PipelineGraph(std::vector<StageSpec> stages, std::vector<Edge> edges, std::int64_t input_work)
    : stages_(std::move(stages)), edges_(std::move(edges)), input_work_(input_work) {
    validate();
}

void PipelineGraph::validate() {
    using Code = GraphError::Code;
    if (stages_.empty()) throw GraphError(Code::Invalid, "pipeline has no stages");
    if (input_work_ < 1) throw GraphError(Code::Invalid, "input_work must be positive");

    std::set<std::string> ids;
    for (const auto& s : stages_) {
        if (s.id.empty()) throw GraphError(Code::Invalid, "stage with empty id");
        if (!ids.insert(s.id).second) throw GraphError(Code::Invalid, "duplicate stage id '" + s.id + "'");
        if (s.i_shape.rows < 1 || s.i_shape.attrs < 1 || s.o_shape.rows < 1 || s.o_shape.attrs < 1)
            throw GraphError(Code::Invalid, "stage '" + s.id + "': shapes must be positive");
        if (s.i_freq < 1 || s.o_freq < 1) throw GraphError(Code::Invalid, "stage '" + s.id + "': frequencies must be positive");
        if (s.depth < 0) throw GraphError(Code::Invalid, "stage '" + s.id + "': negative stage depth");
        if (s.reuse.empty()) throw GraphError(Code::Invalid, "stage '" + s.id + "': empty reuse tuple");
        for (auto r : s.reuse)
            if (r < 1) throw GraphError(Code::Invalid, "stage '" + s.id + "': reuse entries must be positive");
        const bool ones = std::all_of(s.reuse.begin(), s.reuse.end(), [](auto r) { return r == 1; });
        if ((s.kind == StageKind::Elementwise || s.kind == StageKind::Reduction) && !ones)
            throw GraphError(Code::Invalid, "stage '" + s.id + "': " + std::string(to_string(s.kind)) +
                                                " stages take no input reuse");
    }

    for (const auto& e : edges_) {
        if (e.producer >= stages_.size() || e.consumer >= stages_.size())
            throw GraphError(Code::DanglingEdge, "edge endpoint out of range");
        if (e.producer == e.consumer) throw GraphError(Code::Cycle, "self-loop on '" + stages_[e.producer].id + "'");
    }

    // Kahn; the priority queue keeps declaration order among ready stages.
    std::vector<std::size_t> indegree(stages_.size(), 0);
    for (const auto& e : edges_) ++indegree[e.consumer];
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < stages_.size(); ++i)
        if (indegree[i] == 0) ready.push(i);
    topo_.clear();
    while (!ready.empty()) {
        const std::size_t s = ready.top();
        ready.pop();
        topo_.push_back(s);
        for (const auto& e : edges_)
            if (e.producer == s && --indegree[e.consumer] == 0) ready.push(e.consumer);
    }
    if (topo_.size() != stages_.size()) throw GraphError(Code::Cycle, "pipeline graph contains a cycle");
}

std::optional<std::size_t> PipelineGraph::find_stage(std::string_view id) const {
    for (std::size_t i = 0; i < stages_.size(); ++i)
        if (stages_[i].id == id) return i;
    return std::nullopt;
}

std::vector<std::size_t> PipelineGraph::producer_edges(std::size_t stage) const {
    std::vector<std::size_t> out;
    for (std::size_t e = 0; e < edges_.size(); ++e)
        if (edges_[e].consumer == stage) out.push_back(e);
    return out;
}

std::vector<std::size_t> PipelineGraph::consumer_edges(std::size_t stage) const {
    std::vector<std::size_t> out;
    for (std::size_t e = 0; e < edges_.size(); ++e)
        if (edges_[e].producer == stage) out.push_back(e);
    return out;
}

PipelineGraph PipelineGraph::with_input_work(std::int64_t work) const {
    return PipelineGraph(stages_, edges_, work);
}

WorkMap derive_work(const PipelineGraph& graph) {
    using Code = GraphError::Code;
    WorkMap out;
    out.stages.resize(graph.stage_count());
    for (std::size_t s : graph.topo_order()) {
        const auto& spec = graph.stages()[s];
        StageWork& w = out.stages[s];
        w.rates = throughputs(spec);
        const auto producers = graph.producer_edges(s);
        if (producers.empty()) {
            w.unique_input = Rational(graph.input_work());
        } else {
            for (auto e : producers) w.unique_input += Rational(out.stages[graph.edges()[e].producer].work);
        }
        const Rational work = w.unique_input * w.rates.tau_out / w.rates.tau_in;
        if (!work.is_integer() || work.num() < 1)
            throw GraphError(Code::NonIntegerWork,
                             "stage '" + spec.id + "': derived work " + work.str() + " is not a positive integer");
        w.work = work.num();
        const Rational duration = w.unique_input / w.rates.tau_in;
        if (!duration.is_integer())
            throw GraphError(Code::NonIntegerWork,
                             "stage '" + spec.id + "': active duration " + duration.str() + " is not a whole cycle count");
        w.duration = duration.num();
    }
    out.edge_read_rate.reserve(graph.edge_count());
    for (const auto& e : graph.edges())
        out.edge_read_rate.push_back(Rational(out.stages[e.producer].work, out.stages[e.consumer].duration));
    return out;
}

namespace {

std::pair<std::size_t, std::size_t> line_column(std::string_view doc, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < doc.size(); ++i) {
        if (doc[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw GraphError(GraphError::Code::Schema, where + ": unknown key '" + it.key() + "'");
    }
}

std::int64_t get_int(const json& obj, const char* key, const std::string& where) {
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) throw GraphError(GraphError::Code::Schema, where + ": '" + key + "' must be an integer");
    return v.get<std::int64_t>();
}

Shape get_shape(const json& obj, const char* key, const std::string& where) {
    const auto& v = obj.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
        throw GraphError(GraphError::Code::Schema, where + ": '" + key + "' must be [rows, attrs]");
    return Shape{v[0].get<std::int64_t>(), v[1].get<std::int64_t>()};
}

}  // namespace

PipelineGraph parse_pipeline(std::string_view document) {
    using Code = GraphError::Code;
    json doc;
    try {
        doc = json::parse(document.begin(), document.end());
    } catch (const json::parse_error& e) {
        auto [line, col] = line_column(document, e.byte > 0 ? e.byte - 1 : 0);
        throw GraphError(Code::Syntax, "syntax error at line " + std::to_string(line) + ", column " +
                                           std::to_string(col) + ": " + e.what());
    }

    try {
        if (!doc.is_object()) throw GraphError(Code::Schema, "pipeline document must be an object");
        reject_unknown_keys(doc, {"input_work", "stages", "edges"}, "pipeline");
        const std::int64_t input_work = get_int(doc, "input_work", "pipeline");

        std::vector<StageSpec> stages;
        for (const auto& js : doc.at("stages")) {
            if (!js.is_object()) throw GraphError(Code::Schema, "stage entries must be objects");
            StageSpec s;
            if (!js.at("id").is_string()) throw GraphError(Code::Schema, "stage id must be a string");
            s.id = js.at("id").get<std::string>();
            const std::string where = "stage '" + s.id + "'";
            reject_unknown_keys(js, {"id", "kind", "i_shape", "o_shape", "i_freq", "o_freq", "reuse", "stage"}, where);
            const auto kind_text = js.at("kind").get<std::string>();
            const auto kind = parse_stage_kind(kind_text);
            if (!kind) throw GraphError(Code::UnknownKind, where + ": unknown stage kind '" + kind_text + "'");
            s.kind = *kind;
            s.i_shape = get_shape(js, "i_shape", where);
            s.o_shape = get_shape(js, "o_shape", where);
            if (js.contains("i_freq")) s.i_freq = get_int(js, "i_freq", where);
            if (js.contains("o_freq")) s.o_freq = get_int(js, "o_freq", where);
            if (js.contains("reuse")) {
                const auto& r = js.at("reuse");
                if (!r.is_array() || r.empty()) throw GraphError(Code::Schema, where + ": 'reuse' must be a non-empty list");
                s.reuse.clear();
                for (const auto& v : r) {
                    if (!v.is_number_integer()) throw GraphError(Code::Schema, where + ": reuse entries must be integers");
                    s.reuse.push_back(v.get<std::int64_t>());
                }
            }
            s.depth = get_int(js, "stage", where);
            stages.push_back(std::move(s));
        }

        std::vector<Edge> edges;
        if (doc.contains("edges")) {
            for (const auto& je : doc.at("edges")) {
                if (!je.is_array() || je.size() != 2 || !je[0].is_string() || !je[1].is_string())
                    throw GraphError(Code::Schema, "edges must be [\"producer\", \"consumer\"] pairs");
                Edge e;
                bool found_p = false, found_c = false;
                for (std::size_t i = 0; i < stages.size(); ++i) {
                    if (stages[i].id == je[0].get<std::string>()) e.producer = i, found_p = true;
                    if (stages[i].id == je[1].get<std::string>()) e.consumer = i, found_c = true;
                }
                if (!found_p || !found_c)
                    throw GraphError(Code::DanglingEdge, "edge references undeclared stage '" +
                                                             (found_p ? je[1] : je[0]).get<std::string>() + "'");
                edges.push_back(e);
            }
        }

        PipelineGraph graph(std::move(stages), std::move(edges), input_work);
        (void)derive_work(graph);
        return graph;
    } catch (const json::exception& e) {
        throw GraphError(Code::Schema, std::string("malformed pipeline: ") + e.what());
    }
}

PipelineGraph load_pipeline(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GraphError(GraphError::Code::Invalid, "cannot open pipeline file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_pipeline(buf.str());
}

std::string serialize_pipeline(const PipelineGraph& graph) {
    json doc;
    doc["input_work"] = graph.input_work();
    json stages = json::array();
    for (const auto& s : graph.stages()) {
        stages.push_back({
            {"id", s.id},
            {"kind", std::string(to_string(s.kind))},
            {"i_shape", {s.i_shape.rows, s.i_shape.attrs}},
            {"o_shape", {s.o_shape.rows, s.o_shape.attrs}},
            {"i_freq", s.i_freq},
            {"o_freq", s.o_freq},
            {"reuse", s.reuse},
            {"stage", s.depth},
        });
    }
    doc["stages"] = std::move(stages);
    json edges = json::array();
    for (const auto& e : graph.edges())
        edges.push_back({graph.stages()[e.producer].id, graph.stages()[e.consumer].id});
    doc["edges"] = std::move(edges);
    return doc.dump(2) + "\n";
}

}  // namespace pcstream
