#include "efpe/hard_instances.hpp"

#include <stdexcept>

namespace efpe {

BitString parse_bits(std::string_view text) {
    BitString bits;
    bits.reserve(text.size());
    for (char c : text) {
        if (c == '0')
            bits.push_back(false);
        else if (c == '1')
            bits.push_back(true);
        else
            throw MalformedInstance("bit string may only contain 0 and 1: '" + std::string(text) + "'");
    }
    return bits;
}

std::string format_bits(const BitString& bits) {
    std::string s;
    for (bool b : bits) s.push_back(b ? '1' : '0');
    return s;
}

bool DisjointnessInput::intersecting() const {
    for (std::size_t j = 0; j < x1.size() && j < x2.size(); ++j)
        if (x1[j] && x2[j]) return true;
    return false;
}

std::size_t split_count(std::size_t p) {
    // C(2p, p) / 2 == C(2p - 1, p - 1).
    std::size_t c = 1;
    for (std::size_t i = 1; i < p; ++i) c = c * (p + i) / i;
    return c;
}

std::vector<Split> enumerate_splits(std::size_t p, std::size_t max_splits) {
    if (p == 0) throw MalformedInstance("enumerate_splits: p must be at least 1");
    if (2 * p > kMaxItems) throw EnumerationLimit("enumerate_splits: 2p exceeds item cap");
    if (split_count(p) > max_splits)
        throw EnumerationLimit("enumerate_splits: C(2p,p)/2 exceeds budget " + std::to_string(max_splits));
    const std::size_t m = 2 * p;
    const Bundle all = (Bundle{1} << m) - 1;
    std::vector<Split> out;
    // Choose p-1 companions of item 0 from {1..2p-1}, lexicographically.
    std::vector<std::size_t> pick(p - 1);
    for (std::size_t i = 0; i + 1 < p; ++i) pick[i] = i + 1;
    for (;;) {
        Bundle first = 1;
        for (auto item : pick) first |= Bundle{1} << item;
        out.push_back({first, all & ~first});
        std::size_t pos = pick.size();
        while (pos > 0 && pick[pos - 1] == m - 1 - (pick.size() - pos)) --pos;
        if (pos == 0) break;
        ++pick[pos - 1];
        for (std::size_t r = pos; r < pick.size(); ++r) pick[r] = pick[r - 1] + 1;
    }
    return out;
}

namespace {

void validate(const DisjointnessInput& input, std::size_t r) {
    if (input.x1.size() != r || input.x2.size() != r)
        throw MalformedInstance("bit strings must have length C(2p,p)/2 = " + std::to_string(r) + " for p = " +
                                std::to_string(input.p) + " (got " + std::to_string(input.x1.size()) + " and " +
                                std::to_string(input.x2.size()) + ")");
}

}  // namespace

UtilityProfile::Table hard_utility_table(const DisjointnessInput& input, std::size_t player) {
    if (player > 1) throw std::out_of_range("hard instances have two players");
    const auto splits = enumerate_splits(input.p);
    validate(input, splits.size());
    const BitString& x = player == 0 ? input.x1 : input.x2;
    const std::size_t p = input.p;
    const std::size_t m = 2 * p;
    const long full = 3 * static_cast<long>(p);

    std::vector<bool> flagged(std::size_t{1} << m, false);
    for (std::size_t j = 0; j < splits.size(); ++j)
        if (x[j]) flagged[player == 0 ? splits[j].first : splits[j].second] = true;

    UtilityProfile::Table table;
    for (Bundle s = 0; s < (Bundle{1} << m); ++s) {
        const auto size = static_cast<std::size_t>(bundle_size(s));
        long v;
        if (size < p)
            v = 3 * static_cast<long>(size);
        else if (size > p || flagged[s])
            v = full;
        else
            v = full - 1;
        table.emplace(s, Rational(v));
    }
    return table;
}

Instance build_hard_instance(const DisjointnessInput& input, const EnumerationBudget& budget) {
    std::vector<UtilityProfile::Table> raw{hard_utility_table(input, 0), hard_utility_table(input, 1)};
    const std::size_t m = 2 * input.p;
    return Instance(2, m, normalize_utilities(raw), all_partitions_allocation_set(2, m, budget),
                    AllocationSource::AllPartitions);
}

std::optional<SubmodularityViolation> check_submodular(const UtilityProfile::Table& u, std::size_t m,
                                                       std::size_t max_items) {
    if (m > max_items)
        throw EnumerationLimit("check_submodular: m = " + std::to_string(m) + " exceeds cap " +
                               std::to_string(max_items));
    const Bundle all = (Bundle{1} << m) - 1;
    auto value = [&](Bundle s) -> const Rational& {
        auto it = u.find(s);
        if (it == u.end()) throw MalformedInstance("check_submodular: table misses subset " + format_bundle(s));
        return it->second;
    };
    for (std::size_t e = 0; e < m; ++e) {
        const Bundle bit = Bundle{1} << e;
        for (Bundle y = 0; y <= all; ++y) {
            if (y & bit) continue;
            const Rational y_gain = value(y | bit) - value(y);
            // Every subset x of y.
            for (Bundle x = y;; x = (x - 1) & y) {
                if (value(x | bit) - value(x) < y_gain) return SubmodularityViolation{x, y, e};
                if (x == 0) break;
            }
        }
    }
    return std::nullopt;
}

bool is_monotone(const UtilityProfile::Table& u, std::size_t m) {
    const Bundle all = (Bundle{1} << m) - 1;
    for (Bundle s = 0; s <= all; ++s)
        for (std::size_t e = 0; e < m; ++e) {
            const Bundle bit = Bundle{1} << e;
            if (!(s & bit) && u.at(s | bit) < u.at(s)) return false;
        }
    return true;
}

DichotomyReport verify_welfare_dichotomy(const DisjointnessInput& input, std::size_t max_p) {
    if (input.p > max_p)
        throw EnumerationLimit("verify_welfare_dichotomy: p = " + std::to_string(input.p) + " exceeds cap " +
                               std::to_string(max_p));
    const Instance inst = build_hard_instance(input);
    const auto splits = enumerate_splits(input.p);
    const std::size_t k = inst.allocation_count();

    DichotomyReport report;
    report.p = input.p;
    report.intersecting = input.intersecting();
    report.target = Rational(6 * static_cast<long>(input.p));

    auto raw_welfare = [&](const MixedAllocation& p) {
        Rational w = 0;
        for (AllocationIndex j = 0; j < k; ++j)
            if (p[j] != 0) w += p[j] * (inst.raw_own(j, 0) + inst.raw_own(j, 1));
        return w;
    };
    auto consider = [&](const MixedAllocation& p, DichotomyEntry::Kind kind) {
        ++report.candidates_checked;
        // EF is cheap; only run the PE oracle on envy-free candidates.
        if (!check_envy_free(p, inst).ok) return;
        if (!check_pareto_efficient(p, inst).ok) return;
        DichotomyEntry e{kind, {}, raw_welfare(p)};
        for (AllocationIndex j : p.support()) e.outcome.emplace_back(inst.allocations()[j], p[j]);
        report.certified.push_back(std::move(e));
    };

    for (AllocationIndex j = 0; j < k; ++j) consider(MixedAllocation::point_mass(k, j), DichotomyEntry::Kind::Deterministic);
    for (const auto& s : splits) {
        const auto a = inst.allocations().find(PureAllocation{{s.first, s.second}});
        const auto b = inst.allocations().find(PureAllocation{{s.second, s.first}});
        if (!a || !b) throw std::logic_error("split allocation missing from the all-partitions set");
        RationalVector q(k, Rational(0));
        q[*a] = Rational(1, 2);
        q[*b] = Rational(1, 2);
        consider(MixedAllocation(std::move(q)), DichotomyEntry::Kind::SplitLottery);
    }

    const Rational bound = report.target - 1;
    if (report.intersecting) {
        report.holds = !report.certified.empty();
        for (const auto& e : report.certified)
            if (e.welfare != report.target) report.holds = false;
    } else {
        report.holds = true;
        for (const auto& e : report.certified) {
            if (e.kind == DichotomyEntry::Kind::Deterministic && e.welfare > bound) report.holds = false;
            if (e.kind == DichotomyEntry::Kind::SplitLottery && e.welfare > bound) report.mixed_above_bound = true;
        }
    }
    return report;
}

}  // namespace efpe
