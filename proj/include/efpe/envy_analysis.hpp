#pragma once

// Expected-utility analysis of a mixed allocation: envy graph, envy-free
// players, and exact EF / PE certification.

#include "efpe/core_model.hpp"

#include <optional>
#include <vector>

namespace efpe {

/// views[i][h] = sum_j p_j u_i(A^(j)_h): player i's expected value for h's bundle stream.
using ViewMatrix = std::vector<RationalVector>;

ViewMatrix expected_views(const MixedAllocation& p, const Instance& inst);

struct EnvyEdge {
    PlayerId from;
    PlayerId to;
    Rational margin;  // strictly positive
};

struct EnvyGraph {
    std::size_t players = 0;
    std::vector<EnvyEdge> edges;

    bool has_edge(PlayerId from, PlayerId to) const;
    std::vector<PlayerId> successors(PlayerId i) const;
};

/// Edge i -> h iff player i's expected value for h's bundle strictly exceeds
/// the value of her own.
EnvyGraph build_envy_graph(const MixedAllocation& p, const Instance& inst);
EnvyGraph envy_graph_from_views(const ViewMatrix& views);

/// nullopt when acyclic, otherwise a directed cycle as a player list.
std::optional<std::vector<PlayerId>> find_cycle(const EnvyGraph& g);
inline bool is_acyclic(const EnvyGraph& g) { return !find_cycle(g).has_value(); }

/// Players with no outgoing envy edge.
std::vector<PlayerId> envy_free_players(const MixedAllocation& p, const Instance& inst);
std::vector<PlayerId> envy_free_players(const EnvyGraph& g);

struct EfReport {
    bool ok = true;
    std::optional<EnvyEdge> witness;  // maximum-margin edge when !ok
};

struct PeReport {
    bool ok = true;
    /// Sum of slack gains at the LP optimum; zero exactly when ok.
    Rational total_gain;
    std::optional<MixedAllocation> dominator;
};

struct Certificate {
    EfReport ef;
    PeReport pe;
    std::optional<Rational> fixed_point_residual;

    bool ok() const { return ef.ok && pe.ok; }
};

EfReport check_envy_free(const MixedAllocation& p, const Instance& inst);

/// LP oracle: maximize sum_i t_i over mixed allocations p' and t >= 0 with
/// E_i(p') >= E_i(p) + t_i. PE iff the optimum is exactly 0.
PeReport check_pareto_efficient(const MixedAllocation& p, const Instance& inst);

Certificate certify(const MixedAllocation& p, const Instance& inst);

/// True iff `q` weakly improves every player's expected own utility over `p`
/// and strictly improves at least one.
bool dominates(const MixedAllocation& q, const MixedAllocation& p, const Instance& inst);

/// Per-player pair of ratios (max-view share, own share) compared by the
/// fixed-point argument: max_h V[i][h] / sum_i' max_h V[i'][h] against
/// V[i][i] / sum_i' V[i'][i'].
struct ShareRatios {
    RationalVector max_view_share;
    RationalVector own_share;
};

ShareRatios share_ratios(const ViewMatrix& views);

}  // namespace efpe
