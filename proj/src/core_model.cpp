#include "efpe/core_model.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <sstream>

namespace efpe {

std::string format_bundle(Bundle b) {
    std::ostringstream os;
    os << '{';
    bool first = true;
    for (std::size_t item = 0; item < kMaxItems; ++item) {
        if (b & (Bundle{1} << item)) {
            if (!first) os << ',';
            os << item;
            first = false;
        }
    }
    os << '}';
    return os.str();
}

int bundle_size(Bundle b) { return std::popcount(b); }

// --- UtilityProfile ---------------------------------------------------------

UtilityProfile::UtilityProfile(std::vector<Table> raw, std::vector<Table> normalized)
    : raw_(std::move(raw)), normalized_(std::move(normalized)) {
    if (raw_.size() != normalized_.size())
        throw MalformedInstance("utility profile: raw/normalized player count mismatch");
}

const Rational& UtilityProfile::operator()(PlayerId i, Bundle s) const {
    auto it = normalized_.at(i).find(s);
    if (it == normalized_[i].end())
        throw MalformedInstance("player " + std::to_string(i) + " has no utility for bundle " +
                                format_bundle(s));
    return it->second;
}

const Rational& UtilityProfile::raw(PlayerId i, Bundle s) const {
    auto it = raw_.at(i).find(s);
    if (it == raw_[i].end())
        throw MalformedInstance("player " + std::to_string(i) + " has no utility for bundle " +
                                format_bundle(s));
    return it->second;
}

bool UtilityProfile::has(PlayerId i, Bundle s) const {
    return i < normalized_.size() && normalized_[i].contains(s);
}

UtilityProfile normalize_utilities(const std::vector<UtilityProfile::Table>& raw) {
    std::vector<UtilityProfile::Table> normalized;
    normalized.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto& table = raw[i];
        if (table.empty())
            throw MalformedInstance("player " + std::to_string(i) + " has no utility values");
        auto [lo, hi] = std::minmax_element(table.begin(), table.end(),
                                            [](const auto& a, const auto& b) { return a.second < b.second; });
        const Rational min = lo->second;
        const Rational range = hi->second - min;
        UtilityProfile::Table out;
        for (const auto& [s, v] : table) {
            if (range == 0)
                out.emplace(s, Rational(1));
            else
                out.emplace(s, Rational(1 + (v - min) / range));
        }
        normalized.push_back(std::move(out));
    }
    return UtilityProfile(raw, std::move(normalized));
}

UtilityProfile::Table additive_table(std::span<const Rational> item_values) {
    const std::size_t m = item_values.size();
    if (m > kMaxItems) throw EnumerationLimit("additive utilities: m exceeds item cap");
    UtilityProfile::Table table;
    const Bundle full = (Bundle{1} << m) - 1;
    for (Bundle s = 0;; ++s) {
        Rational v = 0;
        for (std::size_t b = 0; b < m; ++b)
            if (s & (Bundle{1} << b)) v += item_values[b];
        table.emplace(s, v);
        if (s == full) break;
    }
    return table;
}

// --- PureAllocation / AllocationSet ------------------------------------------

Bundle PureAllocation::allocated_items() const {
    Bundle all = 0;
    for (Bundle b : bundles) all |= b;
    return all;
}

bool PureAllocation::disjoint() const {
    Bundle seen = 0;
    for (Bundle b : bundles) {
        if (seen & b) return false;
        seen |= b;
    }
    return true;
}

PureAllocation PureAllocation::swapped(PlayerId g, PlayerId h) const {
    PureAllocation out = *this;
    std::swap(out.bundles.at(g), out.bundles.at(h));
    return out;
}

AllocationSet AllocationSet::from_list(std::size_t n, std::size_t m, std::vector<PureAllocation> list) {
    if (n == 0) throw MalformedInstance("allocation set: n must be positive");
    if (m > kMaxItems) throw EnumerationLimit("allocation set: m exceeds item cap of 24");
    const Bundle universe = (Bundle{1} << m) - 1;
    AllocationSet set;
    set.n_ = n;
    set.m_ = m;
    for (auto& a : list) {
        if (a.players() != n)
            throw MalformedInstance("allocation has " + std::to_string(a.players()) +
                                    " bundles, expected " + std::to_string(n));
        if (!a.disjoint()) throw MalformedInstance("allocation bundles are not pairwise disjoint");
        if (a.allocated_items() & ~universe) throw MalformedInstance("allocation uses an item index >= m");
        if (set.index_.contains(a.bundles)) continue;
        set.index_.emplace(a.bundles, set.allocations_.size());
        set.allocations_.push_back(std::move(a));
    }
    return set;
}

std::optional<AllocationIndex> AllocationSet::find(const PureAllocation& a) const {
    auto it = index_.find(a.bundles);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

AllocationSet all_partitions_allocation_set(std::size_t n, std::size_t m, const EnumerationBudget& budget) {
    if (n == 0) throw MalformedInstance("all_partitions: n must be positive");
    if (m > budget.max_items)
        throw EnumerationLimit("all_partitions: m = " + std::to_string(m) + " exceeds item cap " +
                               std::to_string(budget.max_items));
    std::size_t k = 1;
    for (std::size_t item = 0; item < m; ++item) {
        k *= n + 1;
        if (k > budget.max_allocations)
            throw EnumerationLimit("all_partitions: (n+1)^m exceeds allocation budget " +
                                   std::to_string(budget.max_allocations));
    }
    std::vector<PureAllocation> list;
    list.reserve(k);
    // Owner digit per item in base n+1; digit n means unallocated.
    std::vector<std::size_t> owner(m, 0);
    for (std::size_t code = 0; code < k; ++code) {
        std::size_t c = code;
        PureAllocation a{std::vector<Bundle>(n, 0)};
        for (std::size_t item = 0; item < m; ++item) {
            owner[item] = c % (n + 1);
            c /= n + 1;
            if (owner[item] < n) a.bundles[owner[item]] |= Bundle{1} << item;
        }
        list.push_back(std::move(a));
    }
    return AllocationSet::from_list(n, m, std::move(list));
}

std::optional<SwapViolation> is_swappable(const AllocationSet& set) {
    const std::size_t n = set.players();
    for (AllocationIndex j = 0; j < set.size(); ++j)
        for (PlayerId g = 0; g < n; ++g)
            for (PlayerId h = g + 1; h < n; ++h)
                if (!set.find(set[j].swapped(g, h))) return SwapViolation{j, g, h};
    return std::nullopt;
}

AllocationSet swap_closure(std::size_t n, std::size_t m, std::vector<PureAllocation> partial,
                           const EnumerationBudget& budget) {
    AllocationSet seed = AllocationSet::from_list(n, m, std::move(partial));
    std::vector<PureAllocation> closed = seed.allocations();
    std::map<std::vector<Bundle>, bool> seen;
    for (const auto& a : closed) seen.emplace(a.bundles, true);
    std::deque<std::size_t> frontier;
    for (std::size_t j = 0; j < closed.size(); ++j) frontier.push_back(j);
    while (!frontier.empty()) {
        const std::size_t j = frontier.front();
        frontier.pop_front();
        for (PlayerId g = 0; g < n; ++g) {
            for (PlayerId h = g + 1; h < n; ++h) {
                PureAllocation s = closed[j].swapped(g, h);
                if (seen.contains(s.bundles)) continue;
                if (closed.size() >= budget.max_allocations)
                    throw EnumerationLimit("swap_closure: closure exceeds allocation budget " +
                                           std::to_string(budget.max_allocations));
                seen.emplace(s.bundles, true);
                closed.push_back(std::move(s));
                frontier.push_back(closed.size() - 1);
            }
        }
    }
    return AllocationSet::from_list(n, m, std::move(closed));
}

// --- Instance ---------------------------------------------------------------

Instance::Instance(std::size_t n, std::size_t m, UtilityProfile utilities, AllocationSet allocations,
                   AllocationSource source)
    : n_(n), m_(m), utilities_(std::move(utilities)), allocations_(std::move(allocations)), source_(source) {
    if (n_ == 0) throw MalformedInstance("n must be at least 1");
    if (m_ > kMaxItems) throw EnumerationLimit("m exceeds item cap of 24");
    if (utilities_.players() != n_)
        throw MalformedInstance("utilities: expected " + std::to_string(n_) + " players, got " +
                                std::to_string(utilities_.players()));
    if (allocations_.players() != n_ || allocations_.items() != m_)
        throw MalformedInstance("allocation set dimensions do not match instance");
    if (allocations_.size() == 0) throw MalformedInstance("allocation set is empty");
    views_.reserve(allocations_.size() * n_ * n_);
    for (AllocationIndex j = 0; j < allocations_.size(); ++j)
        for (PlayerId i = 0; i < n_; ++i)
            for (PlayerId h = 0; h < n_; ++h) views_.push_back(utilities_(i, allocations_[j].bundles[h]));
}

const Rational& Instance::raw_own(AllocationIndex j, PlayerId i) const {
    return utilities_.raw(i, allocations_[j].bundles[i]);
}

// --- MixedAllocation / WeightVector -----------------------------------------

MixedAllocation::MixedAllocation(RationalVector p) : p_(std::move(p)) {
    if (p_.empty()) throw PreconditionError("mixed allocation: empty probability vector");
    for (const auto& q : p_)
        if (q < 0) throw PreconditionError("mixed allocation: negative probability " + to_string(q));
    if (sum(p_) != 1) throw PreconditionError("mixed allocation: probabilities sum to " + to_string(sum(p_)));
}

MixedAllocation MixedAllocation::point_mass(std::size_t k, AllocationIndex j) {
    RationalVector p(k, Rational(0));
    p.at(j) = 1;
    return MixedAllocation(std::move(p));
}

std::vector<AllocationIndex> MixedAllocation::support() const {
    std::vector<AllocationIndex> s;
    for (AllocationIndex j = 0; j < p_.size(); ++j)
        if (p_[j] > 0) s.push_back(j);
    return s;
}

void validate_epsilon(std::size_t n, const Rational& epsilon) {
    if (n == 0) throw PreconditionError("weight vector: n must be positive");
    if (epsilon <= 0) throw PreconditionError("epsilon must be positive, got " + to_string(epsilon));
    if (epsilon * Rational(static_cast<long>(n)) > 1)
        throw EmptyDomain("epsilon " + to_string(epsilon) + " exceeds 1/n; truncated simplex is empty");
}

bool in_truncated_simplex(std::span<const Rational> w, const Rational& epsilon) {
    return sum(w) == 1 && std::all_of(w.begin(), w.end(), [&](const Rational& x) { return x >= epsilon; });
}

WeightVector::WeightVector(RationalVector w, Rational epsilon) : w_(std::move(w)), epsilon_(std::move(epsilon)) {
    validate_epsilon(w_.size(), epsilon_);
    if (!in_truncated_simplex(w_, epsilon_)) throw PreconditionError("weight vector is not in the truncated simplex");
}

WeightVector WeightVector::uniform(std::size_t n, const Rational& epsilon) {
    return WeightVector(RationalVector(n, Rational(1, static_cast<long>(n))), epsilon);
}

Rational expected_utility(const MixedAllocation& p, PlayerId viewer, PlayerId owner, const Instance& inst) {
    if (p.size() != inst.allocation_count())
        throw PreconditionError("mixed allocation length does not match allocation set");
    Rational e = 0;
    for (AllocationIndex j = 0; j < p.size(); ++j)
        if (p[j] != 0) e += p[j] * inst.view(j, viewer, owner);
    return e;
}

}  // namespace efpe
