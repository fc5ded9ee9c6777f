#pragma once

// Exact mixed-integer linear programming: dictionary-form rational simplex
// for relaxations, depth-first branch-and-bound for integrality.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace pcstream::milp {

using Number = mpq_class;

enum class Sense { LessEqual, GreaterEqual, Equal };

struct Term {
    std::size_t var;
    Number coef;
};

struct Row {
    std::vector<Term> terms;
    Sense sense = Sense::LessEqual;
    Number rhs;
    std::string label;
};

struct Variable {
    std::string name;
    Number lower;
    Number upper;
    bool integer = true;
    /// Fractional variables with higher priority are branched on first.
    int priority = 0;
};

/// Minimize objective . x subject to rows and finite variable bounds.
struct Problem {
    std::vector<Variable> vars;
    std::vector<Row> rows;
    std::vector<Term> objective;

    std::size_t add_var(std::string name, Number lower, Number upper, bool integer = true);
    void add_row(std::vector<Term> terms, Sense sense, Number rhs, std::string label = {});
};

enum class Status { Optimal, Infeasible, NodeLimit };

struct Result {
    Status status = Status::Infeasible;
    Number objective;
    std::vector<Number> values;
    std::size_t nodes = 0;
    std::size_t pivots = 0;
};

/// LP relaxation (integrality ignored).
Result solve_lp(const Problem& problem);

struct Options {
    std::size_t node_limit = 2'000'000;
    /// Objective takes integer values at every integer point; enables ceil-based pruning.
    bool integral_objective = false;
    /// Enumerate instead of branching once at most this many integer variables are unfixed...
    std::size_t enumerate_max_free = 3;
    /// ...and their box holds at most this many points.
    std::size_t enumerate_max_points = 64;
    /// Optional known feasible point; checked, then used as the first incumbent.
    std::vector<Number> incumbent;
};

/// True when `values` satisfies every row, bound and integrality requirement.
bool feasible(const Problem& problem, const std::vector<Number>& values);

Result solve_milp(const Problem& problem, const Options& options = {});

}  // namespace pcstream::milp
