#include "efpe/rational_lp.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace efpe {

namespace {

// x_v = offset + sign * y_pos  (or y_pos - y_neg for a split free variable)
struct VariableMap {
    enum class Kind { Shifted, Reflected, Split } kind;
    Rational offset;
    std::size_t pos = 0;
    std::size_t neg = 0;
};

class Tableau {
public:
    Tableau(std::vector<RationalVector> rows, std::vector<std::size_t> basis, std::size_t columns)
        : rows_(std::move(rows)), basis_(std::move(basis)), columns_(columns) {}

    std::size_t row_count() const { return rows_.size(); }
    const std::vector<std::size_t>& basis() const { return basis_; }
    const Rational& rhs(std::size_t r) const { return rows_[r][columns_]; }
    const Rational& at(std::size_t r, std::size_t c) const { return rows_[r][c]; }

    // Sets the objective row for maximize cost . y over the current basis.
    void price(const RationalVector& cost) {
        objective_.assign(columns_ + 1, Rational(0));
        for (std::size_t c = 0; c < columns_; ++c) objective_[c] = cost[c];
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            const Rational& cb = cost[basis_[r]];
            if (cb == 0) continue;
            for (std::size_t c = 0; c <= columns_; ++c)
                if (rows_[r][c] != 0) objective_[c] -= cb * rows_[r][c];
        }
    }

    Rational value() const { return -objective_[columns_]; }

    // Runs primal simplex with Bland's rule over columns below `allowed`.
    // Returns false if the objective is unbounded.
    bool optimize(std::size_t allowed) {
        for (;;) {
            std::size_t entering = columns_;
            for (std::size_t c = 0; c < allowed; ++c) {
                if (objective_[c] > 0) {
                    entering = c;
                    break;
                }
            }
            if (entering == columns_) return true;

            std::size_t leaving = rows_.size();
            Rational best_ratio;
            for (std::size_t r = 0; r < rows_.size(); ++r) {
                if (rows_[r][entering] <= 0) continue;
                Rational ratio = rows_[r][columns_] / rows_[r][entering];
                if (leaving == rows_.size() || ratio < best_ratio ||
                    (ratio == best_ratio && basis_[r] < basis_[leaving])) {
                    leaving = r;
                    best_ratio = std::move(ratio);
                }
            }
            if (leaving == rows_.size()) return false;
            pivot(leaving, entering);
        }
    }

    void pivot(std::size_t r, std::size_t e) {
        auto& prow = rows_[r];
        const Rational inv = 1 / prow[e];
        for (auto& x : prow)
            if (x != 0) x *= inv;
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            if (i == r || rows_[i][e] == 0) continue;
            eliminate(rows_[i], prow, Rational(rows_[i][e]));
        }
        if (!objective_.empty() && objective_[e] != 0) eliminate(objective_, prow, Rational(objective_[e]));
        basis_[r] = e;
    }

    void drop_row(std::size_t r) {
        rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(r));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
    }

    RationalVector primal(std::size_t count) const {
        RationalVector y(count, Rational(0));
        for (std::size_t r = 0; r < rows_.size(); ++r)
            if (basis_[r] < count) y[basis_[r]] = rows_[r][columns_];
        return y;
    }

private:
    static void eliminate(RationalVector& target, const RationalVector& prow, const Rational& factor) {
        for (std::size_t c = 0; c < prow.size(); ++c)
            if (prow[c] != 0) target[c] -= factor * prow[c];
    }

    std::vector<RationalVector> rows_;
    std::vector<std::size_t> basis_;
    std::size_t columns_;
    RationalVector objective_;
};

void validate(const LinearProgram& lp) {
    if (lp.objective && lp.objective->size() != lp.num_vars)
        throw MalformedLp("objective has " + std::to_string(lp.objective->size()) + " coefficients, expected " +
                          std::to_string(lp.num_vars));
    for (std::size_t r = 0; r < lp.constraints.size(); ++r)
        if (lp.constraints[r].coeffs.size() != lp.num_vars)
            throw MalformedLp("constraint " + std::to_string(r) + " has " +
                              std::to_string(lp.constraints[r].coeffs.size()) + " coefficients, expected " +
                              std::to_string(lp.num_vars));
    if (!lp.bounds.empty() && lp.bounds.size() != lp.num_vars)
        throw MalformedLp("bounds list has " + std::to_string(lp.bounds.size()) + " entries, expected " +
                          std::to_string(lp.num_vars));
}

const VariableBounds& bounds_of(const LinearProgram& lp, std::size_t v) {
    static const VariableBounds kDefault{};
    return lp.bounds.empty() ? kDefault : lp.bounds[v];
}

}  // namespace

bool satisfies(const LinearProgram& lp, const RationalVector& x) {
    if (x.size() != lp.num_vars) return false;
    for (std::size_t v = 0; v < lp.num_vars; ++v) {
        const auto& b = bounds_of(lp, v);
        if (b.lower && x[v] < *b.lower) return false;
        if (b.upper && x[v] > *b.upper) return false;
    }
    for (const auto& con : lp.constraints) {
        Rational lhs = 0;
        for (std::size_t v = 0; v < lp.num_vars; ++v)
            if (con.coeffs[v] != 0) lhs += con.coeffs[v] * x[v];
        switch (con.relation) {
            case Relation::LessEqual:
                if (lhs > con.rhs) return false;
                break;
            case Relation::Equal:
                if (lhs != con.rhs) return false;
                break;
            case Relation::GreaterEqual:
                if (lhs < con.rhs) return false;
                break;
        }
    }
    return true;
}

LpResult solve_lp(const LinearProgram& lp) {
    validate(lp);

    // Substitute every variable by non-negative structural columns.
    std::vector<VariableMap> vars;
    std::size_t structural = 0;
    std::vector<LinearConstraint> rows = lp.constraints;
    for (std::size_t v = 0; v < lp.num_vars; ++v) {
        const auto& b = bounds_of(lp, v);
        if (b.lower) {
            vars.push_back({VariableMap::Kind::Shifted, *b.lower, structural++, 0});
        } else if (b.upper) {
            vars.push_back({VariableMap::Kind::Reflected, *b.upper, structural++, 0});
        } else {
            vars.push_back({VariableMap::Kind::Split, Rational(0), structural, structural + 1});
            structural += 2;
        }
    }
    // Upper bounds on shifted variables become explicit rows.
    for (std::size_t v = 0; v < lp.num_vars; ++v) {
        const auto& b = bounds_of(lp, v);
        if (b.lower && b.upper) {
            RationalVector coeffs(lp.num_vars, Rational(0));
            coeffs[v] = 1;
            rows.push_back({std::move(coeffs), Relation::LessEqual, *b.upper});
        }
    }

    struct StdRow {
        RationalVector coeffs;
        Relation relation;
        Rational rhs;
    };
    std::vector<StdRow> std_rows;
    for (const auto& con : rows) {
        StdRow row{RationalVector(structural, Rational(0)), con.relation, con.rhs};
        for (std::size_t v = 0; v < lp.num_vars; ++v) {
            const Rational& a = con.coeffs[v];
            if (a == 0) continue;
            const auto& map = vars[v];
            switch (map.kind) {
                case VariableMap::Kind::Shifted:
                    row.coeffs[map.pos] += a;
                    row.rhs -= a * map.offset;
                    break;
                case VariableMap::Kind::Reflected:
                    row.coeffs[map.pos] -= a;
                    row.rhs -= a * map.offset;
                    break;
                case VariableMap::Kind::Split:
                    row.coeffs[map.pos] += a;
                    row.coeffs[map.neg] -= a;
                    break;
            }
        }
        if (row.rhs < 0) {
            for (auto& c : row.coeffs) c = -c;
            row.rhs = -row.rhs;
            if (row.relation == Relation::LessEqual)
                row.relation = Relation::GreaterEqual;
            else if (row.relation == Relation::GreaterEqual)
                row.relation = Relation::LessEqual;
        }
        std_rows.push_back(std::move(row));
    }

    // Column layout: structural | slack/surplus | artificial | rhs.
    std::size_t slack_count = 0;
    std::size_t artificial_count = 0;
    for (const auto& r : std_rows) {
        if (r.relation != Relation::Equal) ++slack_count;
        if (r.relation != Relation::LessEqual) ++artificial_count;
    }
    const std::size_t first_artificial = structural + slack_count;
    const std::size_t columns = first_artificial + artificial_count;

    std::vector<RationalVector> tableau_rows;
    std::vector<std::size_t> basis;
    std::size_t next_slack = structural;
    std::size_t next_artificial = first_artificial;
    for (auto& r : std_rows) {
        RationalVector t(columns + 1, Rational(0));
        std::copy(r.coeffs.begin(), r.coeffs.end(), t.begin());
        t[columns] = r.rhs;
        switch (r.relation) {
            case Relation::LessEqual:
                t[next_slack] = 1;
                basis.push_back(next_slack++);
                break;
            case Relation::GreaterEqual:
                t[next_slack++] = -1;
                t[next_artificial] = 1;
                basis.push_back(next_artificial++);
                break;
            case Relation::Equal:
                t[next_artificial] = 1;
                basis.push_back(next_artificial++);
                break;
        }
        tableau_rows.push_back(std::move(t));
    }
    Tableau tab(std::move(tableau_rows), std::move(basis), columns);

    // Phase 1: maximize -(sum of artificials).
    if (artificial_count > 0) {
        RationalVector phase1(columns, Rational(0));
        for (std::size_t c = first_artificial; c < columns; ++c) phase1[c] = -1;
        tab.price(phase1);
        tab.optimize(columns);
        if (tab.value() < 0) return {LpStatus::Infeasible, {}, Rational(0)};
        // Drive zero-level artificials out of the basis; drop redundant rows.
        for (std::size_t r = 0; r < tab.row_count();) {
            if (tab.basis()[r] < first_artificial) {
                ++r;
                continue;
            }
            std::size_t col = first_artificial;
            for (std::size_t c = 0; c < first_artificial; ++c) {
                if (tab.at(r, c) != 0) {
                    col = c;
                    break;
                }
            }
            if (col == first_artificial) {
                tab.drop_row(r);
            } else {
                tab.pivot(r, col);
                ++r;
            }
        }
    }

    // Phase 2 over structural and slack columns only.
    RationalVector cost(columns, Rational(0));
    Rational constant = 0;
    if (lp.objective) {
        for (std::size_t v = 0; v < lp.num_vars; ++v) {
            const Rational& c = (*lp.objective)[v];
            const auto& map = vars[v];
            switch (map.kind) {
                case VariableMap::Kind::Shifted:
                    cost[map.pos] += c;
                    break;
                case VariableMap::Kind::Reflected:
                    cost[map.pos] -= c;
                    break;
                case VariableMap::Kind::Split:
                    cost[map.pos] += c;
                    cost[map.neg] -= c;
                    break;
            }
        }
        tab.price(cost);
        if (!tab.optimize(first_artificial)) return {LpStatus::Unbounded, {}, Rational(0)};
    }

    const RationalVector y = tab.primal(structural);
    RationalVector x(lp.num_vars);
    for (std::size_t v = 0; v < lp.num_vars; ++v) {
        const auto& map = vars[v];
        switch (map.kind) {
            case VariableMap::Kind::Shifted:
                x[v] = map.offset + y[map.pos];
                break;
            case VariableMap::Kind::Reflected:
                x[v] = map.offset - y[map.pos];
                break;
            case VariableMap::Kind::Split:
                x[v] = y[map.pos] - y[map.neg];
                break;
        }
    }
    if (!satisfies(lp, x)) throw std::logic_error("solve_lp: optimal basis fails re-substitution");

    Rational value = 0;
    if (lp.objective)
        for (std::size_t v = 0; v < lp.num_vars; ++v) value += (*lp.objective)[v] * x[v];
    return {LpStatus::Optimal, std::move(x), std::move(value)};
}

RationalVector project_onto_truncated_simplex(const RationalVector& y, const Rational& epsilon) {
    const std::size_t n = y.size();
    if (n == 0) throw PreconditionError("projection: empty vector");
    if (epsilon * Rational(static_cast<long>(n)) > 1)
        throw EmptyDomain("projection: epsilon " + to_string(epsilon) + " exceeds 1/n");
    if (sum(y) != 1) throw PreconditionError("projection: input must sum to 1, got " + to_string(sum(y)));

    // x_i = max(y_i + lambda, epsilon). Clamp coordinates that fall below epsilon,
    // re-solve lambda on the free set; the clamped set only grows.
    std::vector<bool> clamped(n, false);
    std::size_t clamped_count = 0;
    Rational lambda = 0;
    for (;;) {
        const std::size_t free_count = n - clamped_count;
        if (free_count == 0) break;
        Rational free_sum = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (!clamped[i]) free_sum += y[i];
        lambda = (1 - Rational(static_cast<long>(clamped_count)) * epsilon - free_sum) /
                 Rational(static_cast<long>(free_count));
        bool grew = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (!clamped[i] && y[i] + lambda < epsilon) {
                clamped[i] = true;
                ++clamped_count;
                grew = true;
            }
        }
        if (!grew) break;
    }

    RationalVector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = clamped[i] ? epsilon : Rational(y[i] + lambda);

    // KKT: x_i - y_i - lambda - beta_i = 0, beta_i >= 0, complementary slackness.
    for (std::size_t i = 0; i < n; ++i) {
        const Rational beta = x[i] - y[i] - lambda;
        if (x[i] < epsilon || beta < 0 || (beta != 0 && x[i] != epsilon))
            throw std::logic_error("projection: KKT conditions violated");
    }
    if (sum(x) != 1) throw std::logic_error("projection: result does not sum to 1");
    return x;
}

}  // namespace efpe
