#pragma once

// Exact rational linear programming (dense two-phase simplex, Bland's rule) and
// Euclidean projection onto the truncated simplex W.

#include "efpe/errors.hpp"
#include "efpe/rational.hpp"

#include <optional>
#include <vector>

namespace efpe {

enum class Relation { LessEqual, Equal, GreaterEqual };

struct LinearConstraint {
    RationalVector coeffs;
    Relation relation = Relation::LessEqual;
    Rational rhs;
};

/// Per-variable bounds. The default is x >= 0; a free variable has no lower bound.
struct VariableBounds {
    std::optional<Rational> lower = Rational(0);
    std::optional<Rational> upper;

    static VariableBounds free() { return {std::nullopt, std::nullopt}; }
};

struct LinearProgram {
    std::size_t num_vars = 0;
    /// Maximize objective . x; nullopt means feasibility only.
    std::optional<RationalVector> objective;
    std::vector<LinearConstraint> constraints;
    /// Empty means every variable uses the default bounds.
    std::vector<VariableBounds> bounds;

    void add(RationalVector coeffs, Relation rel, Rational rhs) {
        constraints.push_back({std::move(coeffs), rel, std::move(rhs)});
    }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    RationalVector solution;
    Rational objective_value;
};

/// Solves `lp` exactly. Throws MalformedLp on dimension mismatch. An optimal
/// solution is re-substituted into every constraint and bound before returning.
LpResult solve_lp(const LinearProgram& lp);

/// True iff x satisfies every constraint and bound of lp exactly.
bool satisfies(const LinearProgram& lp, const RationalVector& x);

/// argmin ||x - y||^2 subject to sum x = 1 and x_i >= epsilon, by exact active-set
/// iteration on the KKT system. Requires sum y = 1 (PreconditionError) and
/// epsilon <= 1/n (EmptyDomain).
RationalVector project_onto_truncated_simplex(const RationalVector& y, const Rational& epsilon);

}  // namespace efpe
