#include "efpe/cli_io.hpp"

#include "efpe/rational_lp.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

namespace efpe::io {

namespace {

std::string at(const std::string& base, const std::string& key) { return base + "/" + key; }
std::string at(const std::string& base, std::size_t idx) { return base + "/" + std::to_string(idx); }

const json& require(const json& obj, const std::string& key, const std::string& ptr) {
    if (!obj.is_object()) throw InputError(ptr, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw InputError(at(ptr, key), "missing field");
    return *it;
}

std::size_t as_count(const json& v, const std::string& ptr) {
    if (!v.is_number_integer() || v.get<long long>() < 0) throw InputError(ptr, "expected a non-negative integer");
    return v.get<std::size_t>();
}

Rational as_rational(const json& v, const std::string& ptr) {
    if (v.is_number_integer()) return Rational(v.get<long>());
    if (!v.is_string()) throw InputError(ptr, "expected a rational string \"num/den\"");
    try {
        return parse_rational(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw InputError(ptr, e.what());
    }
}

Bundle as_bundle(const json& v, std::size_t m, const std::string& ptr) {
    const Bundle universe = (Bundle{1} << m) - 1;
    Bundle b = 0;
    if (v.is_number_integer()) {
        const long long mask = v.get<long long>();
        if (mask < 0 || static_cast<unsigned long long>(mask) > universe)
            throw InputError(ptr, "bundle bitmask out of range for m = " + std::to_string(m));
        b = static_cast<Bundle>(mask);
    } else if (v.is_array()) {
        for (std::size_t a = 0; a < v.size(); ++a) {
            const std::size_t item = as_count(v[a], at(ptr, a));
            if (item >= m) throw InputError(at(ptr, a), "item index " + std::to_string(item) + " >= m");
            b |= Bundle{1} << item;
        }
    } else {
        throw InputError(ptr, "bundle must be an item-index array or a bitmask integer");
    }
    return b;
}

PureAllocation as_allocation(const json& v, std::size_t n, std::size_t m, const std::string& ptr) {
    if (!v.is_array() || v.size() != n)
        throw InputError(ptr, "allocation must be an array of " + std::to_string(n) + " bundles");
    PureAllocation a;
    for (std::size_t h = 0; h < n; ++h) a.bundles.push_back(as_bundle(v[h], m, at(ptr, h)));
    if (!a.disjoint()) throw InputError(ptr, "bundles are not pairwise disjoint");
    return a;
}

std::vector<UtilityProfile::Table> parse_utilities(const json& u, std::size_t n, std::size_t m,
                                                   const std::string& ptr) {
    const json& type = require(u, "type", ptr);
    if (!type.is_string()) throw InputError(at(ptr, "type"), "expected \"table\" or \"additive\"");
    std::vector<UtilityProfile::Table> raw;
    if (type == "table") {
        const std::string vptr = at(ptr, "values");
        const json& values = require(u, "values", ptr);
        if (!values.is_array() || values.size() != n)
            throw InputError(vptr, "expected one table per player (" + std::to_string(n) + ")");
        for (std::size_t i = 0; i < n; ++i) {
            const std::string pptr = at(vptr, i);
            if (!values[i].is_array()) throw InputError(pptr, "expected an array of [bitmask, value] pairs");
            UtilityProfile::Table table;
            for (std::size_t e = 0; e < values[i].size(); ++e) {
                const json& entry = values[i][e];
                const std::string eptr = at(pptr, e);
                if (!entry.is_array() || entry.size() != 2) throw InputError(eptr, "expected [bitmask, \"num/den\"]");
                const Bundle s = as_bundle(entry[0], m, at(eptr, 0));
                if (!table.emplace(s, as_rational(entry[1], at(eptr, 1))).second)
                    throw InputError(eptr, "duplicate subset " + format_bundle(s));
            }
            if (table.empty()) throw InputError(pptr, "player has no utility values");
            raw.push_back(std::move(table));
        }
    } else if (type == "additive") {
        const std::string iptr = at(ptr, "items");
        const json& items = require(u, "items", ptr);
        if (!items.is_array() || items.size() != n)
            throw InputError(iptr, "expected one item-value list per player (" + std::to_string(n) + ")");
        for (std::size_t i = 0; i < n; ++i) {
            if (!items[i].is_array() || items[i].size() != m)
                throw InputError(at(iptr, i), "expected " + std::to_string(m) + " item values");
            RationalVector vals;
            for (std::size_t b = 0; b < m; ++b) vals.push_back(as_rational(items[i][b], at(at(iptr, i), b)));
            raw.push_back(additive_table(vals));
        }
    } else {
        throw InputError(at(ptr, "type"), "unknown utility type '" + type.get<std::string>() + "'");
    }
    return raw;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(path.string(), "cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json rationals_to_json(std::span<const Rational> v) { return json(to_strings(v)); }

json players_to_json(const std::vector<PlayerId>& players) {
    json out = json::array();
    for (auto i : players) out.push_back(i + 1);
    return out;
}

}  // namespace

// --- instances ----------------------------------------------------------------

LoadedInstance instance_from_json(const json& doc, bool strict, const EnumerationBudget& budget) {
    const std::string root;
    const std::size_t n = as_count(require(doc, "n", root), "/n");
    const std::size_t m = as_count(require(doc, "m", root), "/m");
    if (n == 0) throw InputError("/n", "n must be at least 1");
    if (m > budget.max_items) throw InputError("/m", "m exceeds the item cap of " + std::to_string(budget.max_items));

    auto raw = parse_utilities(require(doc, "utilities", root), n, m, "/utilities");

    bool closure_added = false;
    std::vector<std::string> warnings;
    const json& alloc = require(doc, "allocations", root);
    AllocationSet set;
    AllocationSource source = AllocationSource::Explicit;
    try {
        if (alloc.is_string()) {
            if (alloc != "all_partitions")
                throw InputError("/allocations", "expected \"all_partitions\" or an explicit list");
            set = all_partitions_allocation_set(n, m, budget);
            source = AllocationSource::AllPartitions;
        } else if (alloc.is_array()) {
            if (alloc.empty()) throw InputError("/allocations", "allocation list is empty");
            std::vector<PureAllocation> list;
            for (std::size_t j = 0; j < alloc.size(); ++j)
                list.push_back(as_allocation(alloc[j], n, m, at(std::string("/allocations"), j)));
            const AllocationSet given = AllocationSet::from_list(n, m, list);
            if (auto v = is_swappable(given)) {
                if (strict)
                    throw InputError("/allocations", "allocation set is not swappable (allocation " +
                                                         std::to_string(v->allocation) + ", players " +
                                                         std::to_string(v->g + 1) + " and " +
                                                         std::to_string(v->h + 1) + ")");
                set = swap_closure(n, m, std::move(list), budget);
                closure_added = true;
                warnings.push_back("allocation list was not swappable; swap closure added " +
                                          std::to_string(set.size() - given.size()) + " allocations");
            } else {
                set = given;
            }
        } else {
            throw InputError("/allocations", "expected \"all_partitions\" or an explicit list");
        }
    } catch (const EnumerationLimit& e) {
        throw InputError("/allocations", e.what());
    }

    // Every bundle reachable from the allocation set needs a value for every player.
    for (const auto& a : set.allocations())
        for (Bundle b : a.bundles)
            for (std::size_t i = 0; i < n; ++i)
                if (!raw[i].contains(b))
                    throw InputError(at(at(std::string("/utilities"), "values"), i),
                                     "missing utility for bundle " + format_bundle(b));

    return LoadedInstance{Instance(n, m, normalize_utilities(raw), std::move(set), source), closure_added,
                          std::move(warnings)};
}

LoadedInstance load_instance(const std::filesystem::path& path, bool strict) {
    return instance_from_json(read_json_file(path), strict);
}

json bundle_to_json(Bundle b) {
    json items = json::array();
    for (std::size_t item = 0; item < kMaxItems; ++item)
        if (b & (Bundle{1} << item)) items.push_back(item);
    return items;
}

json allocation_to_json(const PureAllocation& a) {
    json out = json::array();
    for (Bundle b : a.bundles) out.push_back(bundle_to_json(b));
    return out;
}

json instance_to_json(const Instance& inst) {
    json values = json::array();
    for (const auto& table : inst.utilities().raw_tables()) {
        json t = json::array();
        for (const auto& [s, v] : table) t.push_back(json::array({s, to_string(v)}));
        values.push_back(std::move(t));
    }
    json doc;
    doc["n"] = inst.players();
    doc["m"] = inst.items();
    doc["utilities"] = {{"type", "table"}, {"values", std::move(values)}};
    if (inst.source() == AllocationSource::AllPartitions) {
        doc["allocations"] = "all_partitions";
    } else {
        json list = json::array();
        for (const auto& a : inst.allocations().allocations()) list.push_back(allocation_to_json(a));
        doc["allocations"] = std::move(list);
    }
    return doc;
}

json read_json_file(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(path.string(), std::string("invalid JSON: ") + e.what());
    }
}

// --- mixed allocations and certificates ------------------------------------------

MixedAllocation mixed_allocation_from_json(const json& doc, const Instance& inst) {
    const json& entries = require(doc, "p", "");
    if (!entries.is_array() || entries.empty()) throw InputError("/p", "expected a non-empty array of entries");
    RationalVector p(inst.allocation_count(), Rational(0));
    for (std::size_t e = 0; e < entries.size(); ++e) {
        const std::string ptr = at(std::string("/p"), e);
        const PureAllocation a =
            as_allocation(require(entries[e], "bundles", ptr), inst.players(), inst.items(), at(ptr, "bundles"));
        const auto j = inst.allocations().find(a);
        if (!j) throw InputError(at(ptr, "bundles"), "allocation is not in the instance's allocation set");
        const Rational q = as_rational(require(entries[e], "prob", ptr), at(ptr, "prob"));
        if (q < 0) throw InputError(at(ptr, "prob"), "negative probability");
        p[*j] += q;
    }
    if (sum(p) != 1) throw InputError("/p", "probabilities sum to " + to_string(sum(p)) + ", expected 1");
    return MixedAllocation(std::move(p));
}

json mixed_allocation_to_json(const MixedAllocation& p, const Instance& inst) {
    json entries = json::array();
    for (AllocationIndex j : p.support())
        entries.push_back({{"bundles", allocation_to_json(inst.allocations()[j])}, {"prob", to_string(p[j])}});
    return entries;
}

json certificate_to_json(const Certificate& cert, const Instance& inst) {
    json out;
    out["ef_ok"] = cert.ef.ok;
    if (cert.ef.witness)
        out["ef_witness"] = {{"envious", cert.ef.witness->from + 1},
                             {"envied", cert.ef.witness->to + 1},
                             {"margin", to_string(cert.ef.witness->margin)}};
    else
        out["ef_witness"] = nullptr;
    out["pe_ok"] = cert.pe.ok;
    out["pe_gain"] = to_string(cert.pe.total_gain);
    out["pe_dominator"] = cert.pe.dominator ? mixed_allocation_to_json(*cert.pe.dominator, inst) : json(nullptr);
    out["fixed_point_residual"] =
        cert.fixed_point_residual ? json(to_string(*cert.fixed_point_residual)) : json(nullptr);
    return out;
}

json trace_entry_to_json(const TraceEntry& e) {
    json probs = json::array();
    for (AllocationIndex j : e.support) probs.push_back(json::array({j, to_string(e.p[j])}));
    return {{"iteration", e.iteration},
            {"p", std::move(probs)},
            {"w", rationals_to_json(e.w)},
            {"argmax", e.argmax},
            {"support", e.support},
            {"nu", rationals_to_json(e.nu)},
            {"nu_sum", to_string(sum(e.nu))},
            {"varpi", rationals_to_json(e.varpi)},
            {"residual", to_string(e.residual)},
            {"max_envy", to_string(e.max_envy)},
            {"envy_free", e.envy_free}};
}

json solve_result_to_json(const SolveResult& r, const Instance& inst, double wall_time_seconds) {
    return {{"status", "certified"},
            {"p", mixed_allocation_to_json(r.state.p, inst)},
            {"w", rationals_to_json(r.state.w.values())},
            {"epsilon", to_string(r.epsilon)},
            {"rho", to_string(r.rho)},
            {"phase", to_string(r.phase)},
            {"iterations", r.state.iteration},
            {"candidates", r.candidates_examined},
            {"certificate", certificate_to_json(r.certificate, inst)},
            {"soundness",
             {{"nu_conserved", r.soundness.nu_conserved},
              {"support_in_argmax", r.soundness.support_in_argmax},
              {"non_ef_moves_weight", r.soundness.non_ef_moves_weight},
              {"acceptance_consistent", r.soundness.acceptance_consistent}}},
            {"wall_time", wall_time_seconds}};
}

json dichotomy_report_to_json(const DichotomyReport& r) {
    json certified = json::array();
    for (const auto& e : r.certified) {
        json outcome = json::array();
        for (const auto& [a, q] : e.outcome) outcome.push_back({{"bundles", allocation_to_json(a)}, {"prob", to_string(q)}});
        certified.push_back({{"kind", e.kind == DichotomyEntry::Kind::Deterministic ? "deterministic" : "split_lottery"},
                             {"outcome", std::move(outcome)},
                             {"welfare", to_string(e.welfare)}});
    }
    return {{"p", r.p},
            {"strings", r.intersecting ? "intersecting" : "disjoint"},
            {"target_welfare", to_string(r.target)},
            {"candidates_checked", r.candidates_checked},
            {"certified", std::move(certified)},
            {"holds", r.holds},
            {"mixed_above_bound", r.mixed_above_bound}};
}

std::string envy_graph_to_dot(const EnvyGraph& g) {
    std::ostringstream os;
    const auto cycle = find_cycle(g);
    os << "// acyclic: " << (cycle ? "false" : "true") << '\n';
    os << "digraph envy {\n";
    for (PlayerId i = 0; i < g.players; ++i) os << "  " << i + 1 << ";\n";
    for (const auto& e : g.edges) os << "  " << e.from + 1 << " -> " << e.to + 1 << " [label=\"" << to_string(e.margin) << "\"];\n";
    os << "}\n";
    return os.str();
}

// --- commands -----------------------------------------------------------------

namespace {

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const MalformedInstance& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const EnumerationLimit& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const EmptyDomain& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
}

void print_warnings(const LoadedInstance& li, std::ostream& err) {
    for (const auto& w : li.warnings) err << "warning: " << w << '\n';
}

}  // namespace

int cmd_solve(const SolveOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const LoadedInstance li = load_instance(opts.instance, opts.strict);
        print_warnings(li, err);
        EngineConfig cfg;
        cfg.max_iterations = opts.max_iters;
        cfg.grid_search = opts.grid > 0;
        cfg.grid_resolution = opts.grid;
        cfg.jobs = opts.jobs;
        cfg.record_trace = opts.trace.has_value();
        if (opts.epsilon != "auto") {
            try {
                cfg.epsilon = parse_rational(opts.epsilon);
            } catch (const std::invalid_argument& e) {
                throw InputError("--epsilon", e.what());
            }
        }
        const auto start = std::chrono::steady_clock::now();
        try {
            const SolveResult r = find_fixed_point(li.instance, cfg);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            if (opts.trace) {
                std::ofstream tf(*opts.trace);
                if (!tf) throw InputError("--trace", "cannot open trace file for writing");
                for (const auto& e : r.trace) tf << trace_entry_to_json(e).dump() << '\n';
            }
            out << solve_result_to_json(r, li.instance, secs).dump(2) << '\n';
            return r.certificate.ok() ? int(kSuccess) : int(kSearchFailure);
        } catch (const SearchFailure& f) {
            json doc = {{"status", "search_failure"}, {"message", f.what()}};
            if (f.best())
                doc["best"] = {{"p", mixed_allocation_to_json(*f.best(), li.instance)},
                               {"max_envy", to_string(f.best_max_envy())}};
            out << doc.dump(2) << '\n';
            err << "error: " << f.what() << '\n';
            return int(kSearchFailure);
        }
    });
}

int cmd_verify(const std::filesystem::path& instance, const std::filesystem::path& allocation, std::ostream& out,
               std::ostream& err) {
    return guarded(err, [&] {
        const LoadedInstance li = load_instance(instance);
        print_warnings(li, err);
        const MixedAllocation p = mixed_allocation_from_json(read_json_file(allocation), li.instance);
        const Certificate cert = certify(p, li.instance);
        out << certificate_to_json(cert, li.instance).dump(2) << '\n';
        return cert.ok() ? int(kSuccess) : int(kVerificationFailure);
    });
}

int cmd_envy_graph(const std::filesystem::path& instance, const std::filesystem::path& allocation,
                   std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const LoadedInstance li = load_instance(instance);
        print_warnings(li, err);
        const MixedAllocation p = mixed_allocation_from_json(read_json_file(allocation), li.instance);
        out << envy_graph_to_dot(build_envy_graph(p, li.instance));
        return int(kSuccess);
    });
}

DisjointnessInput disjointness_input(const HardOptions& opts) {
    if (opts.p == 0) throw InputError("--p", "p must be at least 1");
    DisjointnessInput in{opts.p, {}, {}};
    try {
        in.x1 = parse_bits(opts.x1);
        in.x2 = parse_bits(opts.x2);
    } catch (const MalformedInstance& e) {
        throw InputError("--x1/--x2", e.what());
    }
    const std::size_t r = split_count(opts.p);
    if (in.x1.size() != r) throw InputError("--x1", "expected " + std::to_string(r) + " bits for p = " + std::to_string(opts.p));
    if (in.x2.size() != r) throw InputError("--x2", "expected " + std::to_string(r) + " bits for p = " + std::to_string(opts.p));
    return in;
}

int cmd_gen_hard(const HardOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Instance inst = build_hard_instance(disjointness_input(opts));
        const std::string text = instance_to_json(inst).dump(2) + "\n";
        if (opts.out) {
            std::ofstream f(*opts.out);
            if (!f) throw InputError("--out", "cannot open output file");
            f << text;
        } else {
            out << text;
        }
        return int(kSuccess);
    });
}

int cmd_verify_dichotomy(const HardOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const DichotomyReport r = verify_welfare_dichotomy(disjointness_input(opts));
        out << dichotomy_report_to_json(r).dump(2) << '\n';
        return r.holds ? int(kSuccess) : int(kVerificationFailure);
    });
}

int cmd_closure(const std::filesystem::path& instance, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const LoadedInstance li = load_instance(instance);
        print_warnings(li, err);
        json doc = instance_to_json(li.instance);
        if (li.instance.source() == AllocationSource::AllPartitions) {
            json list = json::array();
            for (const auto& a : li.instance.allocations().allocations()) list.push_back(allocation_to_json(a));
            doc["allocations"] = std::move(list);
        }
        out << doc.dump(2) << '\n';
        return int(kSuccess);
    });
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Certified envy-free and Pareto-efficient mixed allocations", "efpe"};
    app.require_subcommand(1, 1);

    SolveOptions solve;
    auto* s = app.add_subcommand("solve", "Search for a certified envy-free and Pareto-efficient mixed allocation");
    s->add_option("--instance", solve.instance, "Instance JSON file")->required();
    s->add_option("--epsilon", solve.epsilon, "Weight floor: a rational or 'auto'");
    s->add_option("--max-iters", solve.max_iters, "Fixed-point iterations before the fallback search");
    s->add_option("--grid", solve.grid, "Weight-grid resolution for the fallback (0 disables the grid pass)");
    s->add_option("--trace", solve.trace, "Write per-iteration trace as JSON lines");
    s->add_option("--jobs", solve.jobs, "Parallel fallback candidate evaluations")->check(CLI::PositiveNumber);
    s->add_flag("--strict", solve.strict, "Reject non-swappable allocation lists instead of closing them");

    std::filesystem::path inst_path, alloc_path;
    auto* v = app.add_subcommand("verify", "Certify envy-freeness and Pareto efficiency of a mixed allocation");
    v->add_option("--instance", inst_path, "Instance JSON file")->required();
    v->add_option("--allocation", alloc_path, "Mixed allocation JSON file")->required();

    auto* g = app.add_subcommand("envy-graph", "Print the envy graph of a mixed allocation in DOT format");
    g->add_option("--instance", inst_path, "Instance JSON file")->required();
    g->add_option("--allocation", alloc_path, "Mixed allocation JSON file")->required();

    HardOptions hard;
    auto* h = app.add_subcommand("gen-hard", "Emit a two-player submodular instance built from two bit strings");
    h->add_option("--p", hard.p, "Half the item count")->required();
    h->add_option("--x1", hard.x1, "Player 1 bit string")->required();
    h->add_option("--x2", hard.x2, "Player 2 bit string")->required();
    h->add_option("--out", hard.out, "Output file (default stdout)");

    auto* d = app.add_subcommand("verify-dichotomy", "Check the welfare dichotomy on a generated instance");
    d->add_option("--p", hard.p, "Half the item count")->required();
    d->add_option("--x1", hard.x1, "Player 1 bit string")->required();
    d->add_option("--x2", hard.x2, "Player 2 bit string")->required();

    auto* c = app.add_subcommand("closure", "Emit the instance with its swap-closed allocation list");
    c->add_option("--instance", inst_path, "Instance JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }

    if (s->parsed()) return cmd_solve(solve, out, err);
    if (v->parsed()) return cmd_verify(inst_path, alloc_path, out, err);
    if (g->parsed()) return cmd_envy_graph(inst_path, alloc_path, out, err);
    if (h->parsed()) return cmd_gen_hard(hard, out, err);
    if (d->parsed()) return cmd_verify_dichotomy(hard, out, err);
    if (c->parsed()) return cmd_closure(inst_path, out, err);
    return kInputError;
}

}  // namespace efpe::io
