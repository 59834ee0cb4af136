#pragma once

// Instance builders, random generators and brute-force oracles shared by the
// unit and acceptance tests. The oracles deliberately avoid the library's
// LP and active-set code so they can cross-check it.

#include "efpe/core_model.hpp"
#include "efpe/envy_analysis.hpp"
#include "efpe/fixedpoint_engine.hpp"
#include "efpe/rational_lp.hpp"

#include <optional>
#include <random>
#include <vector>

namespace efpe::testing {

inline Rational q(long num, long den = 1) {
    Rational r(num, den);
    r.canonicalize();
    return r;
}

inline RationalVector qs(std::initializer_list<Rational> v) { return RationalVector(v); }

/// All-partitions instance from per-player item values.
inline Instance additive_instance(const std::vector<RationalVector>& item_values) {
    const std::size_t n = item_values.size();
    const std::size_t m = item_values.front().size();
    std::vector<UtilityProfile::Table> raw;
    for (const auto& v : item_values) raw.push_back(additive_table(v));
    return Instance(n, m, normalize_utilities(raw), all_partitions_allocation_set(n, m),
                    AllocationSource::AllPartitions);
}

/// n players with identical additive value 1 per item.
inline Instance identical_additive(std::size_t n, std::size_t m) {
    return additive_instance(std::vector<RationalVector>(n, RationalVector(m, Rational(1))));
}

inline Instance table_instance(std::size_t m, const std::vector<UtilityProfile::Table>& raw) {
    const std::size_t n = raw.size();
    return Instance(n, m, normalize_utilities(raw), all_partitions_allocation_set(n, m),
                    AllocationSource::AllPartitions);
}

/// Random all-partitions instance. Values are multiples of 1/4 in [0, 5]; half
/// the players get additive tables, the rest arbitrary set functions.
inline Instance random_instance(std::mt19937_64& rng, std::size_t n, std::size_t m) {
    std::uniform_int_distribution<int> grid(0, 20);
    std::bernoulli_distribution additive(0.5);
    std::vector<UtilityProfile::Table> raw;
    for (std::size_t i = 0; i < n; ++i) {
        if (additive(rng)) {
            RationalVector items;
            for (std::size_t b = 0; b < m; ++b) items.push_back(q(grid(rng), 4));
            raw.push_back(additive_table(items));
        } else {
            UtilityProfile::Table t;
            for (Bundle s = 0; s < (Bundle{1} << m); ++s) t[s] = q(grid(rng), 4);
            raw.push_back(std::move(t));
        }
    }
    return table_instance(m, raw);
}

/// Random rational vector of length n summing to exactly 1, entries in [-1, 2).
inline RationalVector random_unit_sum(std::mt19937_64& rng, std::size_t n) {
    std::uniform_int_distribution<int> num(-12, 24);
    std::uniform_int_distribution<int> den(1, 12);
    RationalVector y(n);
    Rational rest = 1;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        y[i] = q(num(rng), den(rng));
        rest -= y[i];
    }
    y[n - 1] = rest;
    return y;
}

/// Random point of W: Dirichlet-like integer composition scaled into the floor.
inline RationalVector random_weight(std::mt19937_64& rng, std::size_t n, const Rational& eps) {
    std::uniform_int_distribution<int> part(1, 30);
    RationalVector a(n);
    Rational total = 0;
    for (auto& x : a) {
        x = part(rng);
        total += x;
    }
    const Rational spare = 1 - eps * static_cast<long>(n);
    for (auto& x : a) x = eps + spare * x / total;
    return a;
}

/// Projection onto {x : sum x = 1, x >= eps} by trying all 2^n clamp patterns and
/// keeping the one whose KKT system holds. Unique when W is non-empty.
inline std::optional<RationalVector> projection_oracle(const RationalVector& y, const Rational& eps) {
    const std::size_t n = y.size();
    std::optional<RationalVector> found;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        const auto clamped = static_cast<std::size_t>(__builtin_popcountll(mask));
        if (clamped == n) {
            if (eps * static_cast<long>(n) != 1) continue;
            RationalVector x(n, eps);
            if (!found) found = x;
            continue;
        }
        Rational free_sum = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (!(mask >> i & 1)) free_sum += y[i];
        const Rational shift = (1 - eps * static_cast<long>(clamped) - free_sum) / static_cast<long>(n - clamped);
        RationalVector x(n);
        bool kkt = true;
        for (std::size_t i = 0; i < n && kkt; ++i) {
            if (mask >> i & 1) {
                x[i] = eps;
                kkt = eps - y[i] - shift >= 0;  // multiplier of the floor constraint
            } else {
                x[i] = y[i] + shift;
                kkt = x[i] >= eps;
            }
        }
        if (kkt) {
            if (found && *found != x) return std::nullopt;  // non-unique would be a bug in the oracle
            found = x;
        }
    }
    return found;
}

inline Rational squared_distance(const RationalVector& a, const RationalVector& b) {
    Rational d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
    return d;
}

/// rho by direct triple enumeration on the normalized profile.
inline Rational rho_oracle(const Instance& inst) {
    std::optional<Rational> best;
    const auto& u = inst.utilities();
    for (const auto& a : inst.allocations().allocations())
        for (PlayerId i = 0; i < inst.players(); ++i)
            for (PlayerId h = 0; h < inst.players(); ++h) {
                if (i == h) continue;
                const Bundle ai = a.bundles[i], ah = a.bundles[h];
                if (u(i, ai) < u(i, ah) && u(h, ai) < u(h, ah)) {
                    const Rational r = (u(i, ah) - u(i, ai)) / (u(h, ah) - u(h, ai));
                    if (!best || r < *best) best = r;
                }
            }
    return best ? *best / 2 : Rational(1);
}

inline RationalVector own_utilities(const Instance& inst, AllocationIndex j) {
    RationalVector v;
    for (PlayerId i = 0; i < inst.players(); ++i) v.push_back(inst.utilities()(i, inst.allocations()[j].bundles[i]));
    return v;
}

/// Weak domination with at least one strict coordinate.
inline bool pareto_dominates(const RationalVector& a, const RationalVector& b) {
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return false;
        if (a[i] > b[i]) strict = true;
    }
    return strict;
}

/// Two-player point-mass PE test by pairs: point mass j is dominated by some
/// mixture iff a point mass or a two-point mixture dominates it. For two players
/// every vertex of {dominating utility vectors} lies on an edge of the hull.
inline bool point_mass_pe_by_pairs(const Instance& inst, AllocationIndex j) {
    const std::size_t k = inst.allocation_count();
    const RationalVector base = own_utilities(inst, j);
    std::vector<RationalVector> pts;
    for (AllocationIndex l = 0; l < k; ++l) pts.push_back(own_utilities(inst, l));
    for (AllocationIndex a = 0; a < k; ++a) {
        if (pareto_dominates(pts[a], base)) return false;
        for (AllocationIndex b = a + 1; b < k; ++b) {
            // Candidate mixing weights: where the segment crosses base's coordinate lines.
            std::vector<Rational> ts{Rational(1, 2)};
            for (std::size_t i = 0; i < base.size(); ++i) {
                const Rational d = pts[a][i] - pts[b][i];
                if (d != 0) ts.push_back((base[i] - pts[b][i]) / d);
            }
            for (const auto& t : ts) {
                if (t < 0 || t > 1) continue;
                RationalVector mix(base.size());
                for (std::size_t i = 0; i < base.size(); ++i) mix[i] = t * pts[a][i] + (1 - t) * pts[b][i];
                if (pareto_dominates(mix, base)) return false;
            }
        }
    }
    return true;
}

}  // namespace efpe::testing
