#include "efpe/envy_analysis.hpp"

#include "efpe/rational_lp.hpp"

#include <algorithm>
#include <stdexcept>

namespace efpe {

ViewMatrix expected_views(const MixedAllocation& p, const Instance& inst) {
    const std::size_t n = inst.players();
    if (p.size() != inst.allocation_count())
        throw PreconditionError("mixed allocation length does not match allocation set");
    ViewMatrix v(n, RationalVector(n, Rational(0)));
    for (AllocationIndex j = 0; j < p.size(); ++j) {
        if (p[j] == 0) continue;
        for (PlayerId i = 0; i < n; ++i)
            for (PlayerId h = 0; h < n; ++h) v[i][h] += p[j] * inst.view(j, i, h);
    }
    return v;
}

bool EnvyGraph::has_edge(PlayerId from, PlayerId to) const {
    return std::any_of(edges.begin(), edges.end(), [&](const EnvyEdge& e) { return e.from == from && e.to == to; });
}

std::vector<PlayerId> EnvyGraph::successors(PlayerId i) const {
    std::vector<PlayerId> out;
    for (const auto& e : edges)
        if (e.from == i) out.push_back(e.to);
    return out;
}

EnvyGraph envy_graph_from_views(const ViewMatrix& views) {
    EnvyGraph g;
    g.players = views.size();
    for (PlayerId i = 0; i < g.players; ++i)
        for (PlayerId h = 0; h < g.players; ++h) {
            if (h == i) continue;
            Rational margin = views[i][h] - views[i][i];
            if (margin > 0) g.edges.push_back({i, h, std::move(margin)});
        }
    return g;
}

EnvyGraph build_envy_graph(const MixedAllocation& p, const Instance& inst) {
    return envy_graph_from_views(expected_views(p, inst));
}

std::optional<std::vector<PlayerId>> find_cycle(const EnvyGraph& g) {
    enum class Mark { White, Grey, Black };
    std::vector<Mark> mark(g.players, Mark::White);
    std::vector<PlayerId> stack;

    // Recursive DFS; player counts are tiny.
    auto visit = [&](auto&& self, PlayerId u) -> std::optional<std::vector<PlayerId>> {
        mark[u] = Mark::Grey;
        stack.push_back(u);
        for (PlayerId v : g.successors(u)) {
            if (mark[v] == Mark::Grey) {
                auto start = std::find(stack.begin(), stack.end(), v);
                return std::vector<PlayerId>(start, stack.end());
            }
            if (mark[v] == Mark::White)
                if (auto c = self(self, v)) return c;
        }
        stack.pop_back();
        mark[u] = Mark::Black;
        return std::nullopt;
    };
    for (PlayerId u = 0; u < g.players; ++u)
        if (mark[u] == Mark::White)
            if (auto c = visit(visit, u)) return c;
    return std::nullopt;
}

std::vector<PlayerId> envy_free_players(const EnvyGraph& g) {
    std::vector<bool> envious(g.players, false);
    for (const auto& e : g.edges) envious[e.from] = true;
    std::vector<PlayerId> out;
    for (PlayerId i = 0; i < g.players; ++i)
        if (!envious[i]) out.push_back(i);
    return out;
}

std::vector<PlayerId> envy_free_players(const MixedAllocation& p, const Instance& inst) {
    return envy_free_players(build_envy_graph(p, inst));
}

EfReport check_envy_free(const MixedAllocation& p, const Instance& inst) {
    const EnvyGraph g = build_envy_graph(p, inst);
    EfReport r;
    r.ok = g.edges.empty();
    for (const auto& e : g.edges)
        if (!r.witness || e.margin > r.witness->margin) r.witness = e;
    return r;
}

bool dominates(const MixedAllocation& q, const MixedAllocation& p, const Instance& inst) {
    bool strict = false;
    for (PlayerId i = 0; i < inst.players(); ++i) {
        const Rational eq = expected_utility(q, i, i, inst);
        const Rational ep = expected_utility(p, i, i, inst);
        if (eq < ep) return false;
        if (eq > ep) strict = true;
    }
    return strict;
}

PeReport check_pareto_efficient(const MixedAllocation& p, const Instance& inst) {
    const std::size_t n = inst.players();
    const std::size_t k = inst.allocation_count();
    // Variables: p'_0..p'_{k-1}, t_0..t_{n-1}; all >= 0.
    LinearProgram lp;
    lp.num_vars = k + n;
    RationalVector objective(k + n, Rational(0));
    for (PlayerId i = 0; i < n; ++i) objective[k + i] = 1;
    lp.objective = std::move(objective);

    RationalVector simplex(k + n, Rational(0));
    for (AllocationIndex j = 0; j < k; ++j) simplex[j] = 1;
    lp.add(std::move(simplex), Relation::Equal, Rational(1));

    for (PlayerId i = 0; i < n; ++i) {
        RationalVector row(k + n, Rational(0));
        for (AllocationIndex j = 0; j < k; ++j) row[j] = inst.own(j, i);
        row[k + i] = -1;
        lp.add(std::move(row), Relation::GreaterEqual, expected_utility(p, i, i, inst));
    }

    const LpResult res = solve_lp(lp);
    if (res.status != LpStatus::Optimal)
        throw std::logic_error("Pareto oracle LP is feasible and bounded but solver reported otherwise");

    PeReport r;
    r.total_gain = res.objective_value;
    r.ok = res.objective_value == 0;
    if (!r.ok) {
        RationalVector q(res.solution.begin(), res.solution.begin() + static_cast<std::ptrdiff_t>(k));
        MixedAllocation dom(std::move(q));
        if (!dominates(dom, p, inst)) throw std::logic_error("Pareto oracle witness does not dominate");
        r.dominator = std::move(dom);
    }
    return r;
}

Certificate certify(const MixedAllocation& p, const Instance& inst) {
    Certificate c;
    c.ef = check_envy_free(p, inst);
    c.pe = check_pareto_efficient(p, inst);
    return c;
}

ShareRatios share_ratios(const ViewMatrix& views) {
    const std::size_t n = views.size();
    RationalVector max_view(n), own(n);
    Rational max_total = 0, own_total = 0;
    for (PlayerId i = 0; i < n; ++i) {
        max_view[i] = *std::max_element(views[i].begin(), views[i].end());
        own[i] = views[i][i];
        max_total += max_view[i];
        own_total += own[i];
    }
    if (max_total <= 0 || own_total <= 0)
        throw PreconditionError("share ratios need strictly positive expected utilities");
    ShareRatios r{RationalVector(n), RationalVector(n)};
    for (PlayerId i = 0; i < n; ++i) {
        r.max_view_share[i] = max_view[i] / max_total;
        r.own_share[i] = own[i] / own_total;
    }
    return r;
}

}  // namespace efpe
