#pragma once

// Two-player submodular instances built from a pair of Disjointness strings.
//
// Items are 0-based, so the distinguished item that every first-side split
// contains is item 0. The case values of the utility table use 3p for the
// saturated and flagged cases (half the items count as p).

#include "efpe/core_model.hpp"
#include "efpe/envy_analysis.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace efpe {

using BitString = std::vector<bool>;

BitString parse_bits(std::string_view text);
std::string format_bits(const BitString& bits);

struct DisjointnessInput {
    std::size_t p = 1;
    BitString x1;
    BitString x2;

    /// True iff some position has a 1 in both strings.
    bool intersecting() const;
};

struct Split {
    Bundle first;   // contains item 0, |first| = p
    Bundle second;  // complement within 2p items
};

/// r = C(2p, p) / 2 splits: all p-subsets of {0..2p-1} containing item 0, in
/// lexicographic order of their sorted item lists.
std::vector<Split> enumerate_splits(std::size_t p, std::size_t max_splits = 1u << 20);

/// C(2p, p) / 2 computed independently of enumeration.
std::size_t split_count(std::size_t p);

/// Raw (pre-normalization) utility table of one player over all 2^(2p) subsets.
/// `player` is 0 or 1; its flagged sets are the split sides at that position.
UtilityProfile::Table hard_utility_table(const DisjointnessInput& input, std::size_t player);

/// Two-player instance over m = 2p items with the all-partitions allocation set.
Instance build_hard_instance(const DisjointnessInput& input, const EnumerationBudget& budget = {});

struct SubmodularityViolation {
    Bundle x;
    Bundle y;
    std::size_t item;
};

/// Exhaustive check of u(X + e) - u(X) >= u(Y + e) - u(Y) over all X subset of Y, e not in Y.
/// Returns the first violation or nullopt. Requires a value for every subset.
std::optional<SubmodularityViolation> check_submodular(const UtilityProfile::Table& u, std::size_t m,
                                                       std::size_t max_items = 16);

/// True iff u(X) <= u(Y) whenever X is a subset of Y.
bool is_monotone(const UtilityProfile::Table& u, std::size_t m);

struct DichotomyEntry {
    enum class Kind { Deterministic, SplitLottery } kind;
    /// Pure allocations (one for deterministic, two for a lottery) with weights.
    std::vector<std::pair<PureAllocation, Rational>> outcome;
    Rational welfare;  // expected raw u1 + u2
};

struct DichotomyReport {
    std::size_t p = 0;
    bool intersecting = false;
    Rational target;  // 6p
    std::vector<DichotomyEntry> certified;
    std::size_t candidates_checked = 0;
    /// Intersecting: some certified allocation exists and all reach 6p.
    /// Disjoint: every certified deterministic allocation has welfare <= 6p - 1.
    bool holds = false;
    /// Disjoint strings only: a certified lottery above 6p - 1, reported but not asserted.
    bool mixed_above_bound = false;
};

/// Certifies (EF and PE, exact) every deterministic allocation in the
/// all-partitions set and every split lottery (T_j and its swap at 1/2 each),
/// then evaluates the welfare dichotomy on the certified ones.
DichotomyReport verify_welfare_dichotomy(const DisjointnessInput& input, std::size_t max_p = 3);

}  // namespace efpe
