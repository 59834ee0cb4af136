#pragma once

// Search for a fixed point of the map (p, w) -> (P(w), proj_W(nu(p, w))).
//
// P(w) is the simplex of mixed allocations supported on the w-weighted welfare
// maximizers A(w). nu moves weight toward players who value some other player's
// expected bundle more than their own, in shares of the group total. At a fixed point with
// epsilon < rho^n / n the mixed allocation is Pareto efficient and envy-free.

#include "efpe/core_model.hpp"
#include "efpe/envy_analysis.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace efpe {

struct EngineConfig {
    std::size_t max_iterations = 64;
    /// Candidates with ||varpi(p,w) - w||_1 at or below this are sent to exact certification.
    Rational residual_tolerance{1, 1000};
    /// nullopt selects epsilon = rho^n / (2n).
    std::optional<Rational> epsilon;
    bool grid_search = true;
    std::size_t grid_resolution = 8;
    /// Exact enumeration of the welfare-envelope vertices over W.
    bool vertex_search = true;
    std::size_t max_vertex_candidates = 5'000'000;
    bool record_trace = false;
    std::size_t jobs = 1;
};

struct FixedPointState {
    MixedAllocation p;
    WeightVector w;
    Rational residual;
    std::size_t iteration = 0;
};

struct TraceEntry {
    std::size_t iteration = 0;
    RationalVector w;
    std::vector<AllocationIndex> argmax;
    std::vector<AllocationIndex> support;
    RationalVector p;
    RationalVector nu;
    RationalVector varpi;
    Rational residual;
    Rational max_envy;
    bool envy_free = false;
};

enum class SearchPhase { Iteration, Grid, Vertex };
const char* to_string(SearchPhase phase);

struct SoundnessChecks {
    /// sum_i nu_i == 1 on every evaluated (p, w).
    bool nu_conserved = true;
    /// support(p) is inside A(w) on every iteration.
    bool support_in_argmax = true;
    /// For every non-envy-free p in P(w): some coordinate has varpi_i < w_i.
    bool non_ef_moves_weight = true;
    /// At acceptance: nu in W implies envy-free, and envy-free implies zero residual.
    bool acceptance_consistent = true;

    bool all() const { return nu_conserved && support_in_argmax && non_ef_moves_weight && acceptance_consistent; }
};

struct SolveResult {
    FixedPointState state;
    Certificate certificate;
    Rational rho;
    Rational epsilon;
    SearchPhase phase = SearchPhase::Iteration;
    std::size_t candidates_examined = 0;
    std::vector<TraceEntry> trace;
    SoundnessChecks soundness;
};

/// Thrown when both search phases are exhausted. Carries the candidate with the
/// smallest maximum envy margin seen.
class SearchFailure : public std::runtime_error {
public:
    SearchFailure(const std::string& what, std::optional<MixedAllocation> best, Rational best_max_envy)
        : std::runtime_error(what), best_(std::move(best)), best_max_envy_(std::move(best_max_envy)) {}

    const std::optional<MixedAllocation>& best() const { return best_; }
    const Rational& best_max_envy() const { return best_max_envy_; }

private:
    std::optional<MixedAllocation> best_;
    Rational best_max_envy_;
};

/// Indices maximizing sum_i w_i u_i(A^(j)_i); never empty.
std::vector<AllocationIndex> argmax_allocations(const RationalVector& w, const Instance& inst);
inline std::vector<AllocationIndex> argmax_allocations(const WeightVector& w, const Instance& inst) {
    return argmax_allocations(w.values(), inst);
}

struct Selection {
    MixedAllocation p;
    /// Optimal value of the min-max-envy LP; <= 0 means p is envy-free.
    Rational max_envy;
};

/// Mixed allocation supported on `support` minimizing the largest envy margin.
Selection min_envy_on_support(const std::vector<AllocationIndex>& support, const Instance& inst);

/// The engine's choice of p in P(w): min-max-envy over A(w).
Selection select_p_in_P(const WeightVector& w, const Instance& inst);

/// nu_i = w_i + max_h V[i][h] / sum_i' max_h V[i'][h] - V[i][i] / sum_i' V[i'][i'].
RationalVector nu_update(const MixedAllocation& p, const WeightVector& w, const Instance& inst);

/// proj_W(nu(p, w)).
WeightVector varpi(const MixedAllocation& p, const WeightVector& w, const Instance& inst);

/// Half the minimum over mutually-envious (i, h, j) of
/// [u_i(A_h) - u_i(A_i)] / [u_h(A_h) - u_h(A_i)]; 1 when no triple qualifies.
Rational compute_rho(const Instance& inst);

/// Auto: rho^n / (2n). Explicit: validated against epsilon < rho^n / n and epsilon <= 1/n.
Rational choose_epsilon(const Rational& rho, std::size_t n, const EngineConfig& cfg);

/// Candidate weight vectors for the fallback: vertices of the upper envelope of
/// the w-weighted welfare over W. Every support A(w) with w in W is contained
/// in A(v) for one of these vertices v.
std::vector<RationalVector> welfare_envelope_vertices(const Instance& inst, const Rational& epsilon,
                                                      std::size_t max_candidates);

/// Grid points of W at the given resolution.
std::vector<RationalVector> weight_grid(std::size_t n, const Rational& epsilon, std::size_t resolution);

/// Runs the iteration and, if needed, the fallback phases. The returned result
/// always carries a certificate with both EF and PE verified; otherwise throws
/// SearchFailure. Throws PreconditionError if the allocation set is not swappable.
SolveResult find_fixed_point(const Instance& inst, const EngineConfig& cfg = {});

}  // namespace efpe
