#include <doctest.h>

#include <random>

#include "pcstream/graph.hpp"
#include "pcstream/optimizer.hpp"
#include "pcstream/simulator.hpp"
#include "support/pipelines.hpp"

using namespace pcstream;

namespace {

GraphError::Code parse_error(const std::string& doc) {
    try {
        parse_pipeline(doc);
    } catch (const GraphError& e) {
        return e.code();
    }
    FAIL("document parsed: " << doc);
    return GraphError::Code::Invalid;
}

PipelineGraph single(StageSpec s, std::int64_t input_work) { return PipelineGraph({std::move(s)}, {}, input_work); }

}  // namespace

TEST_CASE("declared kNN-to-stencil pipeline") {
    const auto g = parse_pipeline(testing::knn_stencil_document());
    CHECK(g == testing::knn_stencil_pipeline());
    REQUIRE(g.stage_count() == 2);
    const auto knn = throughputs(g.stages()[0]);
    const auto stencil = throughputs(g.stages()[1]);
    CHECK(knn.tau_out == Rational(12, 8));
    CHECK(stencil.tau_in == Rational(3, 2));
    CHECK(stencil.tau_out == Rational(1));

    const auto work = derive_work(g);
    CHECK(work[0].work == 24);
    CHECK(work[0].duration == 16);
    CHECK(work[1].unique_input == Rational(24));
    CHECK(work[1].work == 16);
    CHECK(work[1].duration == 16);
}

TEST_CASE("identity stage") {
    const auto t = throughputs(StageSpec{"id", StageKind::Elementwise, {1, 1}, 1, {1, 1}, 1, {1, 1}, 0});
    CHECK(t.tau_in == Rational(1));
    CHECK(t.tau_out == Rational(1));
    const auto w = derive_work(single(StageSpec{"id", StageKind::Elementwise, {1, 1}, 1, {1, 1}, 1, {1, 1}, 0}, 37));
    CHECK(w[0].work == 37);
}

TEST_CASE("global stages ignore reuse") {
    const auto t = throughputs(StageSpec{"g", StageKind::Global, {2, 3}, 1, {1, 1}, 1, {4, 1}, 0});
    CHECK(t.tau_in == Rational(6));
    const auto s = throughputs(StageSpec{"s", StageKind::Stencil, {2, 3}, 1, {1, 1}, 1, {4, 1}, 0});
    CHECK(s.tau_in == Rational(6, 4));
}

TEST_CASE("stencil output count follows the rate identity") {
    // append a sink so the stencil's writes land in a buffer the simulator counts
    auto base = testing::image_stencil_pipeline();
    auto stages = base.stages();
    stages.push_back(StageSpec{"sink", StageKind::Elementwise, {1, 1}, 1, {1, 1}, 1, {1, 1}, 0});
    const PipelineGraph g(stages, {{0, 1}, {1, 2}}, 15);
    const auto work = derive_work(g);
    CHECK(work[1].work == 15);

    const auto sol = optimize(g);
    const auto trace = simulate(g, work, sol);
    REQUIRE(trace.clean());
    CHECK(trace.tokens_written[1] / edge_scale(g, work, 1) == 15);
}

TEST_CASE("elementwise 1:1 passes the input count through") {
    for (std::int64_t n : {1, 7, 64, 1000}) {
        StageSpec a{"a", StageKind::Elementwise, {1, 1}, 1, {1, 1}, 1, {1, 1}, 0};
        StageSpec b{"b", StageKind::Elementwise, {1, 1}, 1, {1, 1}, 1, {1, 1}, 3};
        CHECK(derive_work(PipelineGraph({a, b}, {{0, 1}}, n))[1].work == n);
    }
}

TEST_CASE("4-to-1 reduction") {
    // one 4-element group per cycle, one output per firing
    StageSpec r{"r", StageKind::Reduction, {4, 1}, 1, {1, 1}, 1, {1, 1}, 0};
    const auto w = derive_work(single(r, 64));
    std::int64_t groups = 0;
    for (std::int64_t i = 0; i < 64; ++i)
        if (i % 4 == 3) ++groups;
    CHECK(w[0].work == groups);
    CHECK(w[0].duration == 16);

    // o_freq 4: the same 16 firing cycles produce an output every fourth cycle
    r.o_freq = 4;
    const auto slow = derive_work(single(r, 64));
    std::int64_t emitted = 0;
    for (std::int64_t cycle = 0; cycle < slow[0].duration; ++cycle)
        if (cycle % 4 == 3) ++emitted;
    CHECK(slow[0].duration == 16);
    CHECK(slow[0].work == emitted);
}

TEST_CASE("duration identity holds for every stage of the random suite") {
    testing::RandomPipelines gen(11);
    for (int i = 0; i < 200; ++i) {
        const auto g = gen.next();
        const auto w = derive_work(g);
        for (const auto& s : w.stages) {
            CHECK(Rational(s.duration) == s.unique_input / s.rates.tau_in);
            CHECK(Rational(s.duration) == Rational(s.work) / s.rates.tau_out);
        }
    }
}

TEST_CASE("document validation") {
    SUBCASE("dangling edge") {
        CHECK(parse_error(R"({"input_work": 4, "stages": [{"id": "a", "kind": "elementwise", "i_shape": [1,1], "o_shape": [1,1], "stage": 0}],
                             "edges": [["a", "b"]]})") == GraphError::Code::DanglingEdge);
    }
    SUBCASE("unknown kind") {
        CHECK(parse_error(R"({"input_work": 4, "stages": [{"id": "a", "kind": "fft", "i_shape": [1,1], "o_shape": [1,1], "stage": 0}], "edges": []})") ==
              GraphError::Code::UnknownKind);
    }
    SUBCASE("unknown key") {
        CHECK(parse_error(R"({"input_work": 4, "stages": [{"id": "a", "kind": "elementwise", "i_shape": [1,1], "o_shape": [1,1], "stage": 0, "latency": 3}], "edges": []})") ==
              GraphError::Code::Schema);
    }
    SUBCASE("cycle") {
        CHECK(parse_error(R"({"input_work": 4, "stages": [
              {"id": "a", "kind": "elementwise", "i_shape": [1,1], "o_shape": [1,1], "stage": 0},
              {"id": "b", "kind": "elementwise", "i_shape": [1,1], "o_shape": [1,1], "stage": 0}],
              "edges": [["a", "b"], ["b", "a"]]})") == GraphError::Code::Cycle);
    }
    SUBCASE("syntax error reports a position") {
        try {
            parse_pipeline("{\n  \"input_work\": 4,\n  \"stages\": [\n}");
            FAIL("parsed");
        } catch (const GraphError& e) {
            CHECK(e.code() == GraphError::Code::Syntax);
            CHECK(std::string(e.what()).find("line 4") != std::string::npos);
        }
    }
    SUBCASE("fractional work") {
        CHECK(parse_error(R"({"input_work": 5, "stages": [{"id": "r", "kind": "reduction", "i_shape": [4,1], "o_shape": [1,1], "o_freq": 4, "stage": 0}], "edges": []})") ==
              GraphError::Code::NonIntegerWork);
    }
    SUBCASE("wrong types") {
        CHECK(parse_error(R"({"input_work": "many", "stages": [], "edges": []})") == GraphError::Code::Schema);
        CHECK(parse_error(R"({"input_work": 4, "stages": [{"id": "a", "kind": "elementwise", "i_shape": [1], "o_shape": [1,1], "stage": 0}], "edges": []})") ==
              GraphError::Code::Schema);
    }
}

TEST_CASE("round trip through the document format") {
    testing::RandomPipelines gen(5);
    for (int i = 0; i < 100; ++i) {
        const auto g = gen.next();
        const auto text = serialize_pipeline(g);
        const auto back = parse_pipeline(text);
        CHECK(back == g);
        CHECK(serialize_pipeline(back) == text);
    }
}

TEST_CASE("topological order prefers declaration order") {
    StageSpec s{"x", StageKind::Elementwise, {1, 1}, 1, {1, 1}, 1, {1, 1}, 0};
    auto named = [&](std::string id) {
        auto c = s;
        c.id = std::move(id);
        return c;
    };
    const PipelineGraph g({named("c"), named("a"), named("b")}, {{1, 0}, {2, 0}}, 4);
    CHECK(g.topo_order() == std::vector<std::size_t>{1, 2, 0});
}

TEST_CASE("rational arithmetic") {
    CHECK(Rational(6, -4) == Rational(-3, 2));
    CHECK(Rational(-3, 2).floor() == -2);
    CHECK(Rational(-3, 2).ceil() == -1);
    CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK_THROWS_AS(Rational(INT64_MAX) * Rational(2), OverflowError);
    CHECK_THROWS(Rational(1, 0));
    CHECK(checked_lcm(4, 6) == 12);
}
