#include "pcstream/milp.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>

namespace pcstream::milp {

std::size_t Problem::add_var(std::string name, Number lower, Number upper, bool integer) {
    if (lower > upper) throw std::invalid_argument("variable '" + name + "' has empty bounds");
    vars.push_back(Variable{std::move(name), std::move(lower), std::move(upper), integer});
    return vars.size() - 1;
}

void Problem::add_row(std::vector<Term> terms, Sense sense, Number rhs, std::string label) {
    for (const auto& t : terms)
        if (t.var >= vars.size()) throw std::out_of_range("row '" + label + "' references unknown variable");
    rows.push_back(Row{std::move(terms), sense, std::move(rhs), std::move(label)});
}

namespace {

// Dictionary (Chvatal) simplex, maximizing.  Every basic variable is written as
//   basic_i = tab[i][0] + sum_j tab[i][j+1] * nonbasic_j
// with all variables nonnegative.
class Dictionary {
public:
    Dictionary(std::size_t n_struct, std::vector<std::vector<Number>> a, std::vector<Number> b)
        : n_struct_(n_struct), m_(b.size()) {
        // columns: structural vars, plus one auxiliary column used only in phase 1
        n_cols_ = n_struct_ + 1;
        tab_.assign(m_, std::vector<Number>(n_cols_ + 1));
        for (std::size_t i = 0; i < m_; ++i) {
            tab_[i][0] = b[i];
            for (std::size_t j = 0; j < n_struct_; ++j) tab_[i][j + 1] = -a[i][j];
            tab_[i][n_struct_ + 1] = 1;  // auxiliary x0
        }
        nonbasic_.resize(n_cols_);
        for (std::size_t j = 0; j < n_struct_; ++j) nonbasic_[j] = j;
        nonbasic_[n_struct_] = aux_id();
        basic_.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) basic_[i] = n_struct_ + i;
        obj_.assign(n_cols_ + 1, 0);
    }

    /// Returns false when infeasible.
    bool phase_one() {
        std::optional<std::size_t> worst;
        for (std::size_t i = 0; i < m_; ++i)
            if (tab_[i][0] < 0 && (!worst || tab_[i][0] < tab_[*worst][0])) worst = i;
        const std::size_t aux_col = n_struct_;
        if (worst) {
            // maximize -x0
            std::fill(obj_.begin(), obj_.end(), 0);
            obj_[aux_col + 1] = -1;
            pivot(*worst, aux_col);
            run();
            if (obj_[0] < 0) return false;
            // drive x0 out of the basis if it stayed basic at zero
            for (std::size_t i = 0; i < m_; ++i) {
                if (basic_[i] != aux_id()) continue;
                for (std::size_t j = 0; j < n_cols_; ++j) {
                    if (tab_[i][j + 1] != 0) {
                        pivot(i, j);
                        break;
                    }
                }
            }
        }
        // retire the auxiliary column
        for (std::size_t j = 0; j < n_cols_; ++j) {
            if (nonbasic_[j] == aux_id()) {
                aux_retired_col_ = j;
                break;
            }
        }
        return true;
    }

    /// objective: coefficients over structural variables (maximize).
    void set_objective(const std::vector<Number>& c, const Number& constant) {
        std::fill(obj_.begin(), obj_.end(), 0);
        obj_[0] = constant;
        for (std::size_t j = 0; j < n_cols_; ++j) {
            const std::size_t v = nonbasic_[j];
            if (v < n_struct_) obj_[j + 1] += c[v];
        }
        for (std::size_t i = 0; i < m_; ++i) {
            const std::size_t v = basic_[i];
            if (v >= n_struct_ || c[v] == 0) continue;
            for (std::size_t k = 0; k <= n_cols_; ++k)
                if (tab_[i][k] != 0) obj_[k] += c[v] * tab_[i][k];
        }
        if (aux_retired_col_) obj_[*aux_retired_col_ + 1] = 0;
    }

    void run() {
        std::size_t degenerate_streak = 0;
        for (;;) {
            const bool bland = degenerate_streak > 32;
            std::optional<std::size_t> enter;
            for (std::size_t j = 0; j < n_cols_; ++j) {
                if (aux_retired_col_ && j == *aux_retired_col_) continue;
                if (obj_[j + 1] <= 0) continue;
                if (!enter) {
                    enter = j;
                } else if (bland ? nonbasic_[j] < nonbasic_[*enter] : obj_[j + 1] > obj_[*enter + 1]) {
                    enter = j;
                }
            }
            if (!enter) return;
            std::optional<std::size_t> leave;
            Number best_ratio;
            for (std::size_t i = 0; i < m_; ++i) {
                const Number& a = tab_[i][*enter + 1];
                if (a >= 0) continue;
                Number ratio = tab_[i][0] / -a;
                if (!leave || ratio < best_ratio || (ratio == best_ratio && basic_[i] < basic_[*leave])) {
                    leave = i;
                    best_ratio = std::move(ratio);
                }
            }
            if (!leave) throw std::logic_error("unbounded LP relaxation (all variables must be bounded)");
            degenerate_streak = best_ratio == 0 ? degenerate_streak + 1 : 0;
            pivot(*leave, *enter);
        }
    }

    Number objective_value() const { return obj_[0]; }

    std::vector<Number> structural_values() const {
        std::vector<Number> x(n_struct_, 0);
        for (std::size_t i = 0; i < m_; ++i)
            if (basic_[i] < n_struct_) x[basic_[i]] = tab_[i][0];
        return x;
    }

    std::size_t pivots() const { return pivots_; }

private:
    std::size_t aux_id() const { return n_struct_ + m_; }

    void pivot(std::size_t r, std::size_t c) {
        ++pivots_;
        auto& row = tab_[r];
        const Number inv = -1 / row[c + 1];
        // express the entering variable from row r
        for (std::size_t k = 0; k <= n_cols_; ++k) {
            if (k == c + 1) continue;
            if (row[k] != 0) row[k] *= inv;
        }
        row[c + 1] = -inv;  // coefficient of the leaving variable
        std::swap(basic_[r], nonbasic_[c]);

        auto substitute = [&](std::vector<Number>& target) {
            const Number f = target[c + 1];
            if (f == 0) return;
            for (std::size_t k = 0; k <= n_cols_; ++k) {
                if (k == c + 1) continue;
                if (row[k] != 0) target[k] += f * row[k];
            }
            target[c + 1] = f * row[c + 1];
        };
        for (std::size_t i = 0; i < m_; ++i)
            if (i != r) substitute(tab_[i]);
        substitute(obj_);
    }

    std::size_t n_struct_;
    std::size_t m_;
    std::size_t n_cols_ = 0;
    std::vector<std::vector<Number>> tab_;
    std::vector<Number> obj_;
    std::vector<std::size_t> basic_;
    std::vector<std::size_t> nonbasic_;
    std::optional<std::size_t> aux_retired_col_;
    std::size_t pivots_ = 0;
};

Result solve_with_bounds(const Problem& p, const std::vector<Number>& lo, const std::vector<Number>& hi) {
    const std::size_t n = p.vars.size();
    // fixed variables are substituted out
    std::vector<std::ptrdiff_t> column(n, -1);
    std::size_t n_free = 0;
    for (std::size_t j = 0; j < n; ++j) {
        if (lo[j] > hi[j]) return Result{Status::Infeasible, 0, {}, 0, 0};
        if (lo[j] != hi[j]) column[j] = static_cast<std::ptrdiff_t>(n_free++);
    }

    std::vector<std::vector<Number>> a;
    std::vector<Number> b;
    auto push_leq = [&](std::vector<Number> coefs, Number rhs, bool negate) {
        if (negate) {
            for (auto& v : coefs) v = -v;
            rhs = -rhs;
        }
        a.push_back(std::move(coefs));
        b.push_back(std::move(rhs));
    };
    for (const auto& row : p.rows) {
        std::vector<Number> coefs(n_free, 0);
        Number rhs = row.rhs;
        bool any = false;
        for (const auto& t : row.terms) {
            rhs -= t.coef * lo[t.var];
            if (column[t.var] >= 0) {
                coefs[column[t.var]] += t.coef;
                any = true;
            }
        }
        if (!any) {
            const bool ok = row.sense == Sense::LessEqual ? rhs >= 0 : row.sense == Sense::GreaterEqual ? rhs <= 0 : rhs == 0;
            if (!ok) return Result{Status::Infeasible, 0, {}, 0, 0};
            continue;
        }
        switch (row.sense) {
            case Sense::LessEqual: push_leq(std::move(coefs), std::move(rhs), false); break;
            case Sense::GreaterEqual: push_leq(std::move(coefs), std::move(rhs), true); break;
            case Sense::Equal:
                push_leq(coefs, rhs, false);
                push_leq(std::move(coefs), std::move(rhs), true);
                break;
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (column[j] < 0) continue;
        std::vector<Number> coefs(n_free, 0);
        coefs[column[j]] = 1;
        push_leq(std::move(coefs), hi[j] - lo[j], false);
    }

    Number constant = 0;
    std::vector<Number> c(n_free, 0);
    for (const auto& t : p.objective) {
        constant += t.coef * lo[t.var];
        if (column[t.var] >= 0) c[column[t.var]] += t.coef;
    }

    Result res;
    std::vector<Number> y(n_free, 0);
    if (n_free > 0) {
        Dictionary dict(n_free, std::move(a), std::move(b));
        if (!dict.phase_one()) return Result{Status::Infeasible, 0, {}, 0, dict.pivots()};
        std::vector<Number> neg_c(n_free);
        for (std::size_t j = 0; j < n_free; ++j) neg_c[j] = -c[j];
        dict.set_objective(neg_c, 0);
        dict.run();
        y = dict.structural_values();
        res.pivots = dict.pivots();
    }
    res.status = Status::Optimal;
    res.values.resize(n);
    res.objective = constant;
    for (std::size_t j = 0; j < n; ++j) {
        res.values[j] = column[j] >= 0 ? lo[j] + y[column[j]] : lo[j];
        if (column[j] >= 0) res.objective += c[column[j]] * y[column[j]];
    }
    return res;
}

Number floor_q(const Number& q) {
    mpz_class f;
    mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return Number(f);
}

Number ceil_q(const Number& q) {
    mpz_class f;
    mpz_cdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return Number(f);
}

bool is_integral(const Number& q) { return q.get_den() == 1; }

// Rows over integer variables only, with integer coefficients, can be divided
// by the coefficient gcd and have their right-hand side rounded inward.
Problem tightened(const Problem& p) {
    Problem out = p;
    for (auto& row : out.rows) {
        if (row.sense == Sense::Equal || row.terms.empty()) continue;
        mpz_class g = 0;
        bool eligible = true;
        for (const auto& t : row.terms) {
            if (!p.vars[t.var].integer || !is_integral(t.coef)) {
                eligible = false;
                break;
            }
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), t.coef.get_num_mpz_t());
        }
        if (!eligible || g == 0) continue;
        const Number div(g);
        for (auto& t : row.terms) t.coef /= div;
        row.rhs /= div;
        row.rhs = row.sense == Sense::GreaterEqual ? ceil_q(row.rhs) : floor_q(row.rhs);
    }
    return out;
}

}  // namespace

bool feasible(const Problem& problem, const std::vector<Number>& values) {
    if (values.size() != problem.vars.size()) return false;
    for (std::size_t j = 0; j < values.size(); ++j) {
        const auto& v = problem.vars[j];
        if (values[j] < v.lower || values[j] > v.upper) return false;
        if (v.integer && !is_integral(values[j])) return false;
    }
    for (const auto& row : problem.rows) {
        Number lhs = 0;
        for (const auto& t : row.terms) lhs += t.coef * values[t.var];
        const bool ok = row.sense == Sense::LessEqual      ? lhs <= row.rhs
                        : row.sense == Sense::GreaterEqual ? lhs >= row.rhs
                                                           : lhs == row.rhs;
        if (!ok) return false;
    }
    return true;
}

Result solve_lp(const Problem& problem) {
    std::vector<Number> lo, hi;
    for (const auto& v : problem.vars) {
        lo.push_back(v.lower);
        hi.push_back(v.upper);
    }
    return solve_with_bounds(problem, lo, hi);
}

Result solve_milp(const Problem& original, const Options& options) {
    const Problem problem = tightened(original);
    struct Node {
        std::vector<Number> lo, hi;
    };
    const std::size_t n = problem.vars.size();
    std::vector<Node> stack;
    {
        Node root;
        for (const auto& v : problem.vars) {
            root.lo.push_back(v.integer ? ceil_q(v.lower) : v.lower);
            root.hi.push_back(v.integer ? floor_q(v.upper) : v.upper);
        }
        stack.push_back(std::move(root));
    }

    Result best;
    best.status = Status::Infeasible;
    bool have_incumbent = false;
    std::size_t nodes = 0, pivots = 0;

    auto dominated = [&](const Number& bound) {
        if (!have_incumbent) return false;
        return options.integral_objective ? ceil_q(bound) >= best.objective : bound >= best.objective;
    };
    auto offer = [&](Result&& candidate) {
        if (!have_incumbent || candidate.objective < best.objective) {
            best = std::move(candidate);
            have_incumbent = true;
        }
    };
    if (!options.incumbent.empty() && feasible(original, options.incumbent)) {
        Result seed;
        seed.status = Status::Optimal;
        seed.values = options.incumbent;
        seed.objective = 0;
        for (const auto& t : problem.objective) seed.objective += t.coef * seed.values[t.var];
        offer(std::move(seed));
    }

    while (!stack.empty()) {
        if (nodes >= options.node_limit) {
            best.status = Status::NodeLimit;
            best.nodes = nodes;
            best.pivots = pivots;
            return best;
        }
        Node node = std::move(stack.back());
        stack.pop_back();
        ++nodes;

        Result lp = solve_with_bounds(problem, node.lo, node.hi);
        pivots += lp.pivots;
        if (lp.status != Status::Optimal || dominated(lp.objective)) continue;

        std::optional<std::size_t> branch;
        std::vector<std::size_t> free_ints;
        for (std::size_t j = 0; j < n; ++j) {
            if (!problem.vars[j].integer) continue;
            if (node.lo[j] != node.hi[j]) free_ints.push_back(j);
            if (!is_integral(lp.values[j]) && (!branch || problem.vars[j].priority > problem.vars[*branch].priority))
                branch = j;
        }
        if (!branch) {
            offer(std::move(lp));
            continue;
        }

        Number volume = 1;
        for (auto j : free_ints) volume *= node.hi[j] - node.lo[j] + 1;
        if (free_ints.size() <= options.enumerate_max_free && volume <= Number(options.enumerate_max_points)) {
            // lexicographic sweep over the remaining integer box
            Node point = node;
            for (auto j : free_ints) point.hi[j] = point.lo[j] = node.lo[j];
            for (;;) {
                Result leaf = solve_with_bounds(problem, point.lo, point.hi);
                pivots += leaf.pivots;
                ++nodes;
                if (leaf.status == Status::Optimal && !dominated(leaf.objective)) offer(std::move(leaf));
                std::size_t k = free_ints.size();
                while (k > 0) {
                    const std::size_t j = free_ints[k - 1];
                    if (point.lo[j] < node.hi[j]) {
                        point.lo[j] += 1;
                        point.hi[j] = point.lo[j];
                        break;
                    }
                    point.lo[j] = point.hi[j] = node.lo[j];
                    --k;
                }
                if (k == 0) break;
            }
            continue;
        }

        const std::size_t j = *branch;
        Node up = node;
        up.lo[j] = ceil_q(lp.values[j]);
        Node down = std::move(node);
        down.hi[j] = floor_q(lp.values[j]);
        stack.push_back(std::move(up));
        stack.push_back(std::move(down));
    }

    best.nodes = nodes;
    best.pivots = pivots;
    if (!have_incumbent) best.status = Status::Infeasible;
    return best;
}

}  // namespace pcstream::milp
