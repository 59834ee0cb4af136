#include "efpe/fixedpoint_engine.hpp"

#include "efpe/rational_lp.hpp"

#include <algorithm>
#include <functional>
#include <future>
#include <set>

namespace efpe {

const char* to_string(SearchPhase phase) {
    switch (phase) {
        case SearchPhase::Iteration: return "iteration";
        case SearchPhase::Grid: return "grid";
        case SearchPhase::Vertex: return "vertex";
    }
    return "unknown";
}

std::vector<AllocationIndex> argmax_allocations(const RationalVector& w, const Instance& inst) {
    const std::size_t n = inst.players();
    if (w.size() != n) throw PreconditionError("argmax_allocations: weight vector has wrong length");
    std::vector<AllocationIndex> best;
    Rational best_value;
    Rational value;
    for (AllocationIndex j = 0; j < inst.allocation_count(); ++j) {
        value = 0;
        for (PlayerId i = 0; i < n; ++i) value += w[i] * inst.own(j, i);
        if (best.empty() || value > best_value) {
            best.assign(1, j);
            best_value = value;
        } else if (value == best_value) {
            best.push_back(j);
        }
    }
    return best;
}

namespace {

Rational max_envy_margin(AllocationIndex j, const Instance& inst) {
    Rational worst;
    bool first = true;
    for (PlayerId i = 0; i < inst.players(); ++i)
        for (PlayerId h = 0; h < inst.players(); ++h) {
            if (i == h) continue;
            Rational m = inst.view(j, i, h) - inst.own(j, i);
            if (first || m > worst) worst = std::move(m);
            first = false;
        }
    return first ? Rational(0) : worst;
}

}  // namespace

Selection min_envy_on_support(const std::vector<AllocationIndex>& support, const Instance& inst) {
    if (support.empty()) throw PreconditionError("min_envy_on_support: empty support");
    const std::size_t k = inst.allocation_count();
    const std::size_t n = inst.players();
    if (support.size() == 1 || n == 1)
        return {MixedAllocation::point_mass(k, support.front()), max_envy_margin(support.front(), inst)};

    // Variables: q_0..q_{s-1} >= 0 over the support, then the free envy bound.
    const std::size_t s = support.size();
    LinearProgram lp;
    lp.num_vars = s + 1;
    lp.bounds.assign(s + 1, VariableBounds{});
    lp.bounds[s] = VariableBounds::free();
    RationalVector objective(s + 1, Rational(0));
    objective[s] = -1;
    lp.objective = std::move(objective);

    RationalVector simplex(s + 1, Rational(1));
    simplex[s] = 0;
    lp.add(std::move(simplex), Relation::Equal, Rational(1));
    for (PlayerId i = 0; i < n; ++i)
        for (PlayerId h = 0; h < n; ++h) {
            if (i == h) continue;
            RationalVector row(s + 1);
            for (std::size_t a = 0; a < s; ++a) row[a] = inst.view(support[a], i, h) - inst.own(support[a], i);
            row[s] = -1;
            lp.add(std::move(row), Relation::LessEqual, Rational(0));
        }

    const LpResult res = solve_lp(lp);
    if (res.status != LpStatus::Optimal) throw std::logic_error("min-envy LP must have an optimum");
    RationalVector p(k, Rational(0));
    for (std::size_t a = 0; a < s; ++a) p[support[a]] = res.solution[a];
    return {MixedAllocation(std::move(p)), res.solution[s]};
}

Selection select_p_in_P(const WeightVector& w, const Instance& inst) {
    return min_envy_on_support(argmax_allocations(w, inst), inst);
}

RationalVector nu_update(const MixedAllocation& p, const WeightVector& w, const Instance& inst) {
    const ShareRatios r = share_ratios(expected_views(p, inst));
    RationalVector nu(w.size());
    for (PlayerId i = 0; i < w.size(); ++i) nu[i] = w[i] + r.max_view_share[i] - r.own_share[i];
    return nu;
}

WeightVector varpi(const MixedAllocation& p, const WeightVector& w, const Instance& inst) {
    return WeightVector(project_onto_truncated_simplex(nu_update(p, w, inst), w.epsilon()), w.epsilon());
}

Rational compute_rho(const Instance& inst) {
    std::optional<Rational> min_ratio;
    const std::size_t n = inst.players();
    for (AllocationIndex j = 0; j < inst.allocation_count(); ++j)
        for (PlayerId i = 0; i < n; ++i)
            for (PlayerId h = 0; h < n; ++h) {
                if (i == h) continue;
                Rational gain_i = inst.view(j, i, h) - inst.own(j, i);
                if (gain_i <= 0) continue;
                Rational loss_h = inst.own(j, h) - inst.view(j, h, i);
                if (loss_h <= 0) continue;
                Rational ratio = gain_i / loss_h;
                if (!min_ratio || ratio < *min_ratio) min_ratio = std::move(ratio);
            }
    return min_ratio ? Rational(*min_ratio / 2) : Rational(1);
}

Rational choose_epsilon(const Rational& rho, std::size_t n, const EngineConfig& cfg) {
    if (rho <= 0) throw PreconditionError("choose_epsilon: rho must be positive");
    if (n == 0) throw PreconditionError("choose_epsilon: n must be positive");
    Rational rho_pow = 1;
    for (std::size_t i = 0; i < n; ++i) rho_pow *= rho;
    const Rational nq(static_cast<long>(n));
    const Rational threshold = rho_pow / nq;
    Rational eps = cfg.epsilon ? *cfg.epsilon : Rational(threshold / 2);
    if (eps <= 0) throw ConfigError("epsilon must be positive, got " + to_string(eps));
    if (eps >= threshold)
        throw ConfigError("epsilon " + to_string(eps) + " must be strictly below rho^n/n = " + to_string(threshold));
    if (eps * nq > 1) throw ConfigError("epsilon " + to_string(eps) + " exceeds 1/n");
    return eps;
}

std::vector<RationalVector> weight_grid(std::size_t n, const Rational& epsilon, std::size_t resolution) {
    std::vector<RationalVector> out;
    if (n == 0 || resolution == 0) return out;
    validate_epsilon(n, epsilon);
    const Rational spread = 1 - Rational(static_cast<long>(n)) * epsilon;
    const Rational r(static_cast<long>(resolution));
    std::vector<std::size_t> parts(n, 0);
    // Compositions of `resolution` into n parts, in lexicographic order.
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
        if (i + 1 == n) {
            parts[i] = left;
            RationalVector w(n);
            for (std::size_t a = 0; a < n; ++a) w[a] = epsilon + spread * Rational(static_cast<long>(parts[a])) / r;
            out.push_back(std::move(w));
            return;
        }
        for (std::size_t v = 0; v <= left; ++v) {
            parts[i] = v;
            rec(i + 1, left - v);
        }
    };
    rec(0, resolution);
    return out;
}

namespace {

// Solves the square system a x = b exactly; nullopt when singular.
std::optional<RationalVector> solve_square(std::vector<RationalVector> a, RationalVector b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = n;
        for (std::size_t r = col; r < n; ++r)
            if (a[r][col] != 0) {
                pivot = r;
                break;
            }
        if (pivot == n) return std::nullopt;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || a[r][col] == 0) continue;
            const Rational f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    RationalVector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return x;
}

// Own-utility vectors that no other allocation strictly Pareto-dominates, deduplicated.
std::vector<RationalVector> efficient_utility_points(const Instance& inst) {
    const std::size_t n = inst.players();
    std::set<RationalVector> distinct;
    for (AllocationIndex j = 0; j < inst.allocation_count(); ++j) {
        RationalVector u(n);
        for (PlayerId i = 0; i < n; ++i) u[i] = inst.own(j, i);
        distinct.insert(std::move(u));
    }
    std::vector<RationalVector> points(distinct.begin(), distinct.end());
    std::vector<RationalVector> frontier;
    for (const auto& u : points) {
        bool dominated = false;
        for (const auto& v : points) {
            if (&u == &v) continue;
            bool weakly = true;
            for (PlayerId i = 0; i < n && weakly; ++i) weakly = v[i] >= u[i];
            if (weakly && v != u) {
                dominated = true;
                break;
            }
        }
        if (!dominated) frontier.push_back(u);
    }
    return frontier;
}

std::size_t binomial_capped(std::size_t n, std::size_t k, std::size_t cap) {
    if (k > n) return 0;
    long double acc = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        acc = acc * static_cast<long double>(n - k + i) / static_cast<long double>(i);
        if (acc > static_cast<long double>(cap)) return cap + 1;
    }
    return static_cast<std::size_t>(acc + 0.5L);
}

// Calls visit(w) for each distinct vertex of the welfare envelope over W, in a
// deterministic order, until visit returns true.
void for_each_envelope_vertex(const Instance& inst, const Rational& epsilon, std::size_t max_candidates,
                              const std::function<bool(const RationalVector&)>& visit) {
    const std::size_t n = inst.players();
    validate_epsilon(n, epsilon);
    if (n == 1) {
        visit(RationalVector{Rational(1)});
        return;
    }
    const std::vector<RationalVector> points = efficient_utility_points(inst);
    const std::size_t total = n + points.size();  // n boundary facets, then one plane per point
    if (binomial_capped(total, n, max_candidates) > max_candidates)
        throw EnumerationLimit("welfare envelope: C(" + std::to_string(total) + ", " + std::to_string(n) +
                               ") vertex candidates exceed budget " + std::to_string(max_candidates));

    std::set<RationalVector> seen;
    std::vector<std::size_t> choice(n);
    for (std::size_t i = 0; i < n; ++i) choice[i] = i;
    for (;;) {
        const bool any_plane = choice.back() >= n;
        if (any_plane) {
            // Unknowns (w_0..w_{n-1}, t); rows: sum w = 1, then the chosen active facets.
            std::vector<RationalVector> a(n + 1, RationalVector(n + 1, Rational(0)));
            RationalVector b(n + 1, Rational(0));
            for (std::size_t i = 0; i < n; ++i) a[0][i] = 1;
            b[0] = 1;
            for (std::size_t r = 0; r < n; ++r) {
                const std::size_t c = choice[r];
                if (c < n) {
                    a[r + 1][c] = 1;
                    b[r + 1] = epsilon;
                } else {
                    const auto& u = points[c - n];
                    for (std::size_t i = 0; i < n; ++i) a[r + 1][i] = u[i];
                    a[r + 1][n] = -1;
                }
            }
            if (auto x = solve_square(std::move(a), std::move(b))) {
                RationalVector w(x->begin(), x->begin() + static_cast<std::ptrdiff_t>(n));
                const Rational& t = (*x)[n];
                bool feasible = std::all_of(w.begin(), w.end(), [&](const Rational& v) { return v >= epsilon; });
                for (std::size_t f = 0; f < points.size() && feasible; ++f) {
                    Rational val = 0;
                    for (std::size_t i = 0; i < n; ++i) val += w[i] * points[f][i];
                    feasible = val <= t;
                }
                if (feasible && seen.insert(w).second && visit(w)) return;
            }
        }
        // Next n-combination of [0, total) in lexicographic order.
        std::size_t pos = n;
        while (pos > 0 && choice[pos - 1] == total - n + (pos - 1)) --pos;
        if (pos == 0) break;
        ++choice[pos - 1];
        for (std::size_t r = pos; r < n; ++r) choice[r] = choice[r - 1] + 1;
    }
}

struct CandidateOutcome {
    std::vector<AllocationIndex> support;
    std::optional<Selection> selection;
    std::optional<Certificate> certificate;
};

CandidateOutcome evaluate_support(std::vector<AllocationIndex> support, const Instance& inst) {
    CandidateOutcome out{std::move(support), std::nullopt, std::nullopt};
    out.selection = min_envy_on_support(out.support, inst);
    if (out.selection->max_envy <= 0) out.certificate = certify(out.selection->p, inst);
    return out;
}

// Fallback search state shared by the grid and vertex phases.
class FallbackSearch {
public:
    FallbackSearch(const Instance& inst, const Rational& epsilon, std::size_t jobs)
        : inst_(inst), epsilon_(epsilon), jobs_(std::max<std::size_t>(jobs, 1)) {}

    // Queues a weight vector; returns true once a certified candidate is found.
    bool offer(const RationalVector& w) {
        auto support = argmax_allocations(w, inst_);
        if (!seen_.insert(support).second) return false;
        pending_.push_back({w, std::move(support)});
        if (pending_.size() >= jobs_) return flush();
        return false;
    }

    bool flush() {
        std::vector<CandidateOutcome> outcomes;
        if (jobs_ == 1 || pending_.size() == 1) {
            for (auto& c : pending_) outcomes.push_back(evaluate_support(c.support, inst_));
        } else {
            std::vector<std::future<CandidateOutcome>> futures;
            for (auto& c : pending_)
                futures.push_back(std::async(std::launch::async, evaluate_support, c.support, std::cref(inst_)));
            for (auto& f : futures) outcomes.push_back(f.get());
        }
        // First acceptance in queue order keeps the result independent of `jobs`.
        for (std::size_t a = 0; a < outcomes.size(); ++a) {
            ++examined_;
            auto& o = outcomes[a];
            if (!best_ || o.selection->max_envy < best_->max_envy) best_ = *o.selection;
            if (o.certificate && o.certificate->ok()) {
                winner_w_ = pending_[a].w;
                winner_sel_ = std::move(o.selection);
                winner_cert_ = std::move(o.certificate);
                pending_.clear();
                return true;
            }
        }
        pending_.clear();
        return false;
    }

    bool found() const { return winner_cert_.has_value(); }
    const RationalVector& winner_w() const { return winner_w_; }
    const Selection& winner_selection() const { return *winner_sel_; }
    const Certificate& winner_certificate() const { return *winner_cert_; }
    const std::optional<Selection>& best() const { return best_; }
    std::size_t examined() const { return examined_; }

private:
    struct Pending {
        RationalVector w;
        std::vector<AllocationIndex> support;
    };

    const Instance& inst_;
    Rational epsilon_;
    std::size_t jobs_;
    std::set<std::vector<AllocationIndex>> seen_;
    std::vector<Pending> pending_;
    std::size_t examined_ = 0;
    std::optional<Selection> best_;
    RationalVector winner_w_;
    std::optional<Selection> winner_sel_;
    std::optional<Certificate> winner_cert_;
};

}  // namespace

std::vector<RationalVector> welfare_envelope_vertices(const Instance& inst, const Rational& epsilon,
                                                      std::size_t max_candidates) {
    std::vector<RationalVector> out;
    for_each_envelope_vertex(inst, epsilon, max_candidates, [&](const RationalVector& w) {
        out.push_back(w);
        return false;
    });
    return out;
}

SolveResult find_fixed_point(const Instance& inst, const EngineConfig& cfg) {
    if (auto v = is_swappable(inst.allocations()))
        throw PreconditionError("allocation set is not swappable: allocation " + std::to_string(v->allocation) +
                                " misses the swap of players " + std::to_string(v->g) + " and " +
                                std::to_string(v->h));
    const std::size_t n = inst.players();
    SolveResult result{
        FixedPointState{MixedAllocation::point_mass(inst.allocation_count(), 0),
                        WeightVector::uniform(n, Rational(1, static_cast<long>(n))), Rational(0), 0},
        Certificate{}, Rational(0), Rational(0), SearchPhase::Iteration, 0, {}, {}};
    result.rho = compute_rho(inst);
    result.epsilon = choose_epsilon(result.rho, n, cfg);
    const Rational& eps = result.epsilon;

    std::optional<Selection> best;
    WeightVector w = WeightVector::uniform(n, eps);

    for (std::size_t t = 0; t < cfg.max_iterations; ++t) {
        const auto argmax = argmax_allocations(w, inst);
        Selection sel = min_envy_on_support(argmax, inst);
        ++result.candidates_examined;
        if (!best || sel.max_envy < best->max_envy) best = sel;

        const auto support = sel.p.support();
        if (!std::includes(argmax.begin(), argmax.end(), support.begin(), support.end()))
            result.soundness.support_in_argmax = false;

        const RationalVector nu = nu_update(sel.p, w, inst);
        if (sum(nu) != 1) result.soundness.nu_conserved = false;
        WeightVector next(project_onto_truncated_simplex(nu, eps), eps);
        const Rational residual = l1_distance(next.values(), w.values());
        const bool envy_free = check_envy_free(sel.p, inst).ok;
        if (!envy_free) {
            bool moved_down = false;
            for (PlayerId i = 0; i < n && !moved_down; ++i) moved_down = next[i] < w[i];
            if (!moved_down) result.soundness.non_ef_moves_weight = false;
        }

        if (cfg.record_trace)
            result.trace.push_back({t, w.values(), argmax, support, sel.p.probabilities(), nu, next.values(), residual,
                                    sel.max_envy, envy_free});

        if (residual <= cfg.residual_tolerance) {
            Certificate cert = certify(sel.p, inst);
            if (cert.ok()) {
                const bool nu_in_w = in_truncated_simplex(nu, eps);
                if ((nu_in_w && !cert.ef.ok) || (cert.ef.ok && residual != 0))
                    result.soundness.acceptance_consistent = false;
                cert.fixed_point_residual = residual;
                result.state = FixedPointState{std::move(sel.p), w, residual, t + 1};
                result.certificate = std::move(cert);
                result.phase = SearchPhase::Iteration;
                return result;
            }
        }
        w = std::move(next);
    }

    FallbackSearch search(inst, eps, cfg.jobs);
    std::size_t iterations = cfg.max_iterations;
    SearchPhase phase = SearchPhase::Grid;
    if (cfg.grid_search) {
        for (const auto& gw : weight_grid(n, eps, cfg.grid_resolution))
            if (search.offer(gw)) break;
        if (!search.found()) search.flush();
    }
    if (!search.found() && cfg.vertex_search) {
        phase = SearchPhase::Vertex;
        for_each_envelope_vertex(inst, eps, cfg.max_vertex_candidates,
                                 [&](const RationalVector& vw) { return search.offer(vw); });
        if (!search.found()) search.flush();
    }
    result.candidates_examined += search.examined();
    if (search.best() && (!best || search.best()->max_envy < best->max_envy)) best = search.best();

    if (!search.found()) {
        throw SearchFailure("no certified envy-free and Pareto-efficient allocation found after " +
                                std::to_string(result.candidates_examined) + " candidates",
                            best ? std::optional<MixedAllocation>(best->p) : std::nullopt,
                            best ? best->max_envy : Rational(0));
    }

    WeightVector fw(search.winner_w(), eps);
    const MixedAllocation& p = search.winner_selection().p;
    const RationalVector nu = nu_update(p, fw, inst);
    if (sum(nu) != 1) result.soundness.nu_conserved = false;
    const WeightVector next(project_onto_truncated_simplex(nu, eps), eps);
    const Rational residual = l1_distance(next.values(), fw.values());
    Certificate cert = search.winner_certificate();
    if ((in_truncated_simplex(nu, eps) && !cert.ef.ok) || (cert.ef.ok && residual != 0))
        result.soundness.acceptance_consistent = false;
    cert.fixed_point_residual = residual;
    result.state = FixedPointState{p, std::move(fw), residual, iterations};
    result.certificate = std::move(cert);
    result.phase = phase;
    return result;
}

}  // namespace efpe
