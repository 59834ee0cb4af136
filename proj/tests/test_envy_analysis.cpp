#include "support.hpp"

#include <doctest.h>

using namespace efpe;
using namespace efpe::testing;

namespace {

struct Symmetric2x2 {
    Instance inst = identical_additive(2, 2);
    std::size_t k = inst.allocation_count();
    AllocationIndex split_a = *inst.allocations().find(PureAllocation{{0b01, 0b10}});
    AllocationIndex split_b = *inst.allocations().find(PureAllocation{{0b10, 0b01}});
    AllocationIndex all_to_first = *inst.allocations().find(PureAllocation{{0b11, 0}});
    AllocationIndex nobody = *inst.allocations().find(PureAllocation{{0, 0}});

    MixedAllocation lottery() const {
        RationalVector p(k, 0);
        p[split_a] = p[split_b] = q(1, 2);
        return MixedAllocation(p);
    }
};

EnvyGraph graph(std::size_t n, std::initializer_list<std::pair<PlayerId, PlayerId>> edges) {
    EnvyGraph g;
    g.players = n;
    for (auto [a, b] : edges) g.edges.push_back({a, b, q(1)});
    return g;
}

}  // namespace

TEST_CASE("build_envy_graph") {
    const Symmetric2x2 s;
    SUBCASE("empty bundle envies the full one") {
        const auto g = build_envy_graph(MixedAllocation::point_mass(s.k, s.all_to_first), s.inst);
        REQUIRE(g.edges.size() == 1);
        CHECK(g.edges[0].from == 1);
        CHECK(g.edges[0].to == 0);
        CHECK(g.edges[0].margin == q(1));  // normalized 2 - 1
    }
    SUBCASE("split lottery has no edges") {
        CHECK(build_envy_graph(s.lottery(), s.inst).edges.empty());
    }
    SUBCASE("identical bundles cannot be envied") {
        CHECK(build_envy_graph(MixedAllocation::point_mass(s.k, s.nobody), s.inst).edges.empty());
    }
}

TEST_CASE("cycle detection") {
    CHECK(is_acyclic(graph(2, {{0, 1}})));
    const auto cyc = find_cycle(graph(2, {{0, 1}, {1, 0}}));
    REQUIRE(cyc);
    CHECK(cyc->size() == 2);
    CHECK(is_acyclic(graph(3, {})));
    const auto tri = find_cycle(graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 1}}));
    REQUIRE(tri);
    CHECK(tri->size() == 3);
    CHECK(is_acyclic(graph(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}})));
}

TEST_CASE("envy_free_players") {
    CHECK(envy_free_players(graph(2, {{1, 0}})) == std::vector<PlayerId>{0});
    CHECK(envy_free_players(graph(3, {})) == std::vector<PlayerId>{0, 1, 2});
    CHECK(envy_free_players(graph(3, {{0, 1}, {1, 2}})) == std::vector<PlayerId>{2});
}

TEST_CASE("check_envy_free") {
    const Symmetric2x2 s;
    CHECK(check_envy_free(s.lottery(), s.inst).ok);
    const auto rep = check_envy_free(MixedAllocation::point_mass(s.k, s.all_to_first), s.inst);
    CHECK_FALSE(rep.ok);
    REQUIRE(rep.witness);
    CHECK(rep.witness->from == 1);
    CHECK(rep.witness->to == 0);
    const Instance solo = identical_additive(1, 2);
    for (AllocationIndex j = 0; j < solo.allocation_count(); ++j)
        CHECK(check_envy_free(MixedAllocation::point_mass(solo.allocation_count(), j), solo).ok);
}

TEST_CASE("check_envy_free witness is the maximum-margin edge") {
    // Three players, player 3 holds everything; players 1 and 2 value it differently.
    const Instance inst = additive_instance({{q(1), q(1)}, {q(1), q(0)}, {q(1), q(1)}});
    const auto j = *inst.allocations().find(PureAllocation{{0, 0, 0b11}});
    const auto rep = check_envy_free(MixedAllocation::point_mass(inst.allocation_count(), j), inst);
    REQUIRE(rep.witness);
    CHECK(rep.witness->to == 2);
    for (const auto& e : build_envy_graph(MixedAllocation::point_mass(inst.allocation_count(), j), inst).edges)
        CHECK(e.margin <= rep.witness->margin);
}

TEST_CASE("check_pareto_efficient") {
    const Symmetric2x2 s;
    SUBCASE("unique utilitarian optimum is PE") {
        // Player 1 values item 1 only, player 2 item 2 only.
        const Instance inst = additive_instance({{q(1), q(0)}, {q(0), q(1)}});
        const auto j = *inst.allocations().find(PureAllocation{{0b01, 0b10}});
        const auto rep = check_pareto_efficient(MixedAllocation::point_mass(inst.allocation_count(), j), inst);
        CHECK(rep.ok);
        CHECK(rep.total_gain == 0);
    }
    SUBCASE("leaving everything unallocated is dominated") {
        const auto p = MixedAllocation::point_mass(s.k, s.nobody);
        const auto rep = check_pareto_efficient(p, s.inst);
        CHECK_FALSE(rep.ok);
        CHECK(rep.total_gain > 0);
        REQUIRE(rep.dominator);
        CHECK(dominates(*rep.dominator, p, s.inst));
    }
    SUBCASE("split lottery is PE") {
        CHECK(check_pareto_efficient(s.lottery(), s.inst).ok);
    }
    SUBCASE("certify combines both checks") {
        const auto c = certify(s.lottery(), s.inst);
        CHECK(c.ok());
        CHECK_FALSE(certify(MixedAllocation::point_mass(s.k, s.all_to_first), s.inst).ok());
    }
}

TEST_CASE("PE oracle matches pairwise domination on two-player point masses") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        const Instance inst = random_instance(rng, 2, 2);
        for (AllocationIndex j = 0; j < inst.allocation_count(); ++j) {
            const auto p = MixedAllocation::point_mass(inst.allocation_count(), j);
            CHECK(check_pareto_efficient(p, inst).ok == point_mass_pe_by_pairs(inst, j));
        }
    }
}

TEST_CASE("PE mixtures: acyclic envy graph, a non-envious player, and the share inequality") {
    // Mixtures of PE points along the utilitarian face are PE; test on random instances.
    std::mt19937_64 rng(29);
    int pe_seen = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const Instance inst = random_instance(rng, 3, 2);
        const auto w = WeightVector(random_weight(rng, 3, q(1, 30)), q(1, 30));
        const auto argmax = argmax_allocations(w, inst);
        RationalVector p(inst.allocation_count(), 0);
        for (std::size_t t = 0; t < argmax.size(); ++t) p[argmax[t]] = q(static_cast<long>(t + 1));
        Rational tot = sum(p);
        for (auto& x : p) x /= tot;
        const MixedAllocation mix(p);
        const auto pe = check_pareto_efficient(mix, inst);
        REQUIRE(pe.ok);  // strictly positive weights make every argmax mixture PE
        ++pe_seen;
        const auto g = build_envy_graph(mix, inst);
        CHECK(is_acyclic(g));
        const auto free_players = envy_free_players(g);
        CHECK_FALSE(free_players.empty());
        const auto shares = share_ratios(expected_views(mix, inst));
        bool all_equal = true;
        for (PlayerId i : free_players) {
            CHECK(shares.max_view_share[i] <= shares.own_share[i]);
            if (shares.max_view_share[i] != shares.own_share[i]) all_equal = false;
        }
        CHECK(all_equal == check_envy_free(mix, inst).ok);
    }
    CHECK(pe_seen == 40);
}
