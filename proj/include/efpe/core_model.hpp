#pragma once

// Domain model for mixed allocations of indivisible items.
//
// Players and items are 0-based internally. A bundle is a bitmask over items
// (bit b set <=> item b belongs to the bundle). A pure allocation gives one
// bundle per player; bundles are pairwise disjoint but need not cover all items.

#include "efpe/errors.hpp"
#include "efpe/rational.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace efpe {

using Bundle = std::uint32_t;
using PlayerId = std::size_t;
using AllocationIndex = std::size_t;

inline constexpr std::size_t kMaxItems = 24;

/// Enumeration budgets shared by every operation that materializes a finite set.
struct EnumerationBudget {
    std::size_t max_allocations = 1u << 16;
    std::size_t max_items = kMaxItems;
};

std::string format_bundle(Bundle b);
int bundle_size(Bundle b);

/// One set function per player, subset -> value. Holds both the values given
/// on input and their per-player rescaling into [1, 2].
class UtilityProfile {
public:
    using Table = std::map<Bundle, Rational>;

    UtilityProfile() = default;
    UtilityProfile(std::vector<Table> raw, std::vector<Table> normalized);

    std::size_t players() const { return normalized_.size(); }

    /// Normalized value u_i(S); throws MalformedInstance if the table has no entry.
    const Rational& operator()(PlayerId i, Bundle s) const;
    const Rational& raw(PlayerId i, Bundle s) const;
    bool has(PlayerId i, Bundle s) const;

    const std::vector<Table>& raw_tables() const { return raw_; }
    const std::vector<Table>& normalized_tables() const { return normalized_; }

    friend bool operator==(const UtilityProfile&, const UtilityProfile&) = default;

private:
    std::vector<Table> raw_;
    std::vector<Table> normalized_;
};

/// Rescales each player's table independently by v -> 1 + (v - min)/(max - min).
/// A player whose values are all equal maps to 1 everywhere.
UtilityProfile normalize_utilities(const std::vector<UtilityProfile::Table>& raw);

/// Expands per-item values into a full 2^m subset table.
UtilityProfile::Table additive_table(std::span<const Rational> item_values);

struct PureAllocation {
    std::vector<Bundle> bundles;

    std::size_t players() const { return bundles.size(); }
    Bundle allocated_items() const;
    bool disjoint() const;
    PureAllocation swapped(PlayerId g, PlayerId h) const;

    friend auto operator<=>(const PureAllocation&, const PureAllocation&) = default;
};

struct SwapViolation {
    AllocationIndex allocation;
    PlayerId g;
    PlayerId h;
};

/// A deduplicated list of pure allocations with canonical lookup.
class AllocationSet {
public:
    AllocationSet() = default;

    /// Collapses duplicates, keeping first occurrence order. Validates that every
    /// allocation has `n` disjoint bundles over `m` items.
    static AllocationSet from_list(std::size_t n, std::size_t m, std::vector<PureAllocation> list);

    std::size_t size() const { return allocations_.size(); }
    std::size_t players() const { return n_; }
    std::size_t items() const { return m_; }
    const PureAllocation& operator[](AllocationIndex j) const { return allocations_[j]; }
    const std::vector<PureAllocation>& allocations() const { return allocations_; }

    std::optional<AllocationIndex> find(const PureAllocation& a) const;

    friend bool operator==(const AllocationSet& a, const AllocationSet& b) {
        return a.n_ == b.n_ && a.m_ == b.m_ && a.allocations_ == b.allocations_;
    }

private:
    std::size_t n_ = 0;
    std::size_t m_ = 0;
    std::vector<PureAllocation> allocations_;
    std::map<std::vector<Bundle>, AllocationIndex> index_;
};

/// Every assignment of each item to one of n players or to nobody; k = (n+1)^m.
AllocationSet all_partitions_allocation_set(std::size_t n, std::size_t m,
                                            const EnumerationBudget& budget = {});

/// Returns the first (j, g, h) whose swap is missing, or nullopt when swappable.
std::optional<SwapViolation> is_swappable(const AllocationSet& set);

/// Smallest superset closed under all pairwise bundle swaps.
AllocationSet swap_closure(std::size_t n, std::size_t m, std::vector<PureAllocation> partial,
                           const EnumerationBudget& budget = {});

enum class AllocationSource { AllPartitions, Explicit };

/// An immutable problem instance. Caches u_i(A^(j)_h) for every allocation j
/// and player pair (i, h), which is all the solver ever reads.
class Instance {
public:
    Instance(std::size_t n, std::size_t m, UtilityProfile utilities, AllocationSet allocations,
             AllocationSource source = AllocationSource::Explicit);

    std::size_t players() const { return n_; }
    std::size_t items() const { return m_; }
    std::size_t allocation_count() const { return allocations_.size(); }
    const UtilityProfile& utilities() const { return utilities_; }
    const AllocationSet& allocations() const { return allocations_; }
    AllocationSource source() const { return source_; }

    /// Normalized u_viewer(A^(j)_owner).
    const Rational& view(AllocationIndex j, PlayerId viewer, PlayerId owner) const {
        return views_[(j * n_ + viewer) * n_ + owner];
    }
    const Rational& own(AllocationIndex j, PlayerId i) const { return view(j, i, i); }
    const Rational& raw_own(AllocationIndex j, PlayerId i) const;

private:
    std::size_t n_;
    std::size_t m_;
    UtilityProfile utilities_;
    AllocationSet allocations_;
    AllocationSource source_;
    std::vector<Rational> views_;
};

/// Probability vector over an instance's allocation set.
class MixedAllocation {
public:
    /// Throws PreconditionError unless every entry is >= 0 and they sum to exactly 1.
    explicit MixedAllocation(RationalVector p);

    static MixedAllocation point_mass(std::size_t k, AllocationIndex j);

    std::size_t size() const { return p_.size(); }
    const Rational& operator[](AllocationIndex j) const { return p_[j]; }
    const RationalVector& probabilities() const { return p_; }
    std::vector<AllocationIndex> support() const;

    friend bool operator==(const MixedAllocation&, const MixedAllocation&) = default;

private:
    RationalVector p_;
};

/// A point of the truncated simplex W = { w : sum w = 1, w_i >= epsilon }.
class WeightVector {
public:
    /// Throws EmptyDomain if epsilon > 1/n and PreconditionError if w is not in W.
    WeightVector(RationalVector w, Rational epsilon);

    static WeightVector uniform(std::size_t n, const Rational& epsilon);

    std::size_t size() const { return w_.size(); }
    const Rational& operator[](PlayerId i) const { return w_[i]; }
    const RationalVector& values() const { return w_; }
    const Rational& epsilon() const { return epsilon_; }

private:
    RationalVector w_;
    Rational epsilon_;
};

/// Checks 0 < epsilon <= 1/n; throws EmptyDomain / PreconditionError otherwise.
void validate_epsilon(std::size_t n, const Rational& epsilon);
bool in_truncated_simplex(std::span<const Rational> w, const Rational& epsilon);

/// sum_j p_j u_viewer(A^(j)_owner).
Rational expected_utility(const MixedAllocation& p, PlayerId viewer, PlayerId owner,
                          const Instance& inst);

}  // namespace efpe
