#include <doctest.h>

#include <optional>
#include <random>

#include "pcstream/milp.hpp"

using namespace pcstream::milp;

TEST_CASE("small LP optimum is exact") {
    // minimize -x - y subject to x + 2y <= 4, 3x + y <= 6
    Problem p;
    auto x = p.add_var("x", 0, 10, false);
    auto y = p.add_var("y", 0, 10, false);
    p.add_row({{x, 1}, {y, 2}}, Sense::LessEqual, 4);
    p.add_row({{x, 3}, {y, 1}}, Sense::LessEqual, 6);
    p.objective = {{x, -1}, {y, -1}};
    const auto r = solve_lp(p);
    REQUIRE(r.status == Status::Optimal);
    CHECK(r.values[x] == Number(8, 5));
    CHECK(r.values[y] == Number(6, 5));
    CHECK(r.objective == Number(-14, 5));
}

TEST_CASE("integer program rounds where the relaxation does not") {
    Problem p;
    auto x = p.add_var("x", 0, 10);
    auto y = p.add_var("y", 0, 10);
    p.add_row({{x, 1}, {y, 2}}, Sense::LessEqual, 4);
    p.add_row({{x, 3}, {y, 1}}, Sense::LessEqual, 6);
    p.objective = {{x, -1}, {y, -1}};
    const auto r = solve_milp(p);
    REQUIRE(r.status == Status::Optimal);
    CHECK(r.objective == -2);
    CHECK(feasible(p, r.values));
}

TEST_CASE("infeasible systems are reported") {
    Problem p;
    auto x = p.add_var("x", 0, 5);
    p.add_row({{x, 2}}, Sense::Equal, 3);
    CHECK(solve_milp(p).status == Status::Infeasible);
    CHECK(solve_lp(p).status == Status::Optimal);

    Problem q;
    auto a = q.add_var("a", 0, 5, false);
    q.add_row({{a, 1}}, Sense::GreaterEqual, 6);
    CHECK(solve_lp(q).status == Status::Infeasible);
}

TEST_CASE("empty bounds are rejected at construction") {
    Problem p;
    CHECK_THROWS_AS(p.add_var("x", 3, 2), std::invalid_argument);
    CHECK_THROWS_AS(p.add_row({{4, 1}}, Sense::LessEqual, 0), std::out_of_range);
}

TEST_CASE("an infeasible incumbent is ignored") {
    Problem p;
    auto x = p.add_var("x", 0, 10);
    p.add_row({{x, 1}}, Sense::GreaterEqual, 3);
    p.objective = {{x, 1}};
    Options o;
    o.incumbent = {Number(1)};
    const auto r = solve_milp(p, o);
    CHECK(r.objective == 3);
}

TEST_CASE("branch and bound agrees with enumeration on random integer programs") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> coef(-6, 6), rhs(-10, 20), bound(1, 5), nrows(1, 5), nvars(1, 4);
    std::bernoulli_distribution geq(0.3), eq(0.1);
    int solved = 0;
    for (int trial = 0; trial < 300; ++trial) {
        Problem p;
        const int n = nvars(rng);
        std::vector<int> ub;
        for (int j = 0; j < n; ++j) {
            ub.push_back(bound(rng));
            p.add_var("x" + std::to_string(j), 0, ub.back());
        }
        const int m = nrows(rng);
        for (int i = 0; i < m; ++i) {
            std::vector<Term> terms;
            for (int j = 0; j < n; ++j) terms.push_back({static_cast<std::size_t>(j), coef(rng)});
            const Sense s = eq(rng) ? Sense::Equal : geq(rng) ? Sense::GreaterEqual : Sense::LessEqual;
            p.add_row(std::move(terms), s, rhs(rng));
        }
        for (int j = 0; j < n; ++j) p.objective.push_back({static_cast<std::size_t>(j), coef(rng)});

        // brute force over the box
        std::optional<Number> best;
        std::vector<Number> point(n, 0);
        for (;;) {
            if (feasible(p, point)) {
                Number v = 0;
                for (const auto& t : p.objective) v += t.coef * point[t.var];
                if (!best || v < *best) best = v;
            }
            int k = 0;
            while (k < n && point[k] == ub[k]) point[k++] = 0;
            if (k == n) break;
            point[k] += 1;
        }

        Options o;
        o.integral_objective = true;
        const auto r = solve_milp(p, o);
        if (!best) {
            CHECK(r.status == Status::Infeasible);
            continue;
        }
        ++solved;
        REQUIRE(r.status == Status::Optimal);
        CHECK(r.objective == *best);
        CHECK(feasible(p, r.values));
    }
    CHECK(solved > 50);
}
