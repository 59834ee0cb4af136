#pragma once

// JSON (de)serialization of instances, mixed allocations and certificates, and
// the command implementations behind the `efpe` executable.
//
// Conventions: rationals are "num/den" strings (plain integers are accepted on
// input); items are 0-based bit positions; players are 1-based in every
// emitted report (witnesses, DOT nodes), matching the usual "player 1" labels.

#include "efpe/core_model.hpp"
#include "efpe/envy_analysis.hpp"
#include "efpe/fixedpoint_engine.hpp"
#include "efpe/hard_instances.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace efpe::io {

using json = nlohmann::json;

/// Schema or value error in an input document. `pointer` names the offending field.
class InputError : public std::runtime_error {
public:
    InputError(std::string pointer, const std::string& message)
        : std::runtime_error(pointer + ": " + message), pointer_(std::move(pointer)) {}
    const std::string& pointer() const { return pointer_; }

private:
    std::string pointer_;
};

enum ExitCode : int { kSuccess = 0, kInputError = 1, kSearchFailure = 2, kVerificationFailure = 3 };

struct LoadedInstance {
    Instance instance;
    /// True when an explicit allocation list was not swappable and was closed on load.
    bool closure_added = false;
    std::vector<std::string> warnings;
};

/// Parses an instance document. Explicit allocation lists are swap-closed; with
/// `strict` a non-swappable list is an InputError instead.
LoadedInstance instance_from_json(const json& doc, bool strict = false, const EnumerationBudget& budget = {});
LoadedInstance load_instance(const std::filesystem::path& path, bool strict = false);
json instance_to_json(const Instance& inst);

json bundle_to_json(Bundle b);
json allocation_to_json(const PureAllocation& a);

/// {"p": [{"bundles": [[items...], ...], "prob": "q"}, ...]}; entries refer to
/// allocations by their bundle lists.
MixedAllocation mixed_allocation_from_json(const json& doc, const Instance& inst);
json mixed_allocation_to_json(const MixedAllocation& p, const Instance& inst);

json certificate_to_json(const Certificate& cert, const Instance& inst);
json trace_entry_to_json(const TraceEntry& e);
json solve_result_to_json(const SolveResult& r, const Instance& inst, double wall_time_seconds);
json dichotomy_report_to_json(const DichotomyReport& r);

/// DOT digraph; nodes are 1-based players, edge labels exact margins. The first
/// line is a comment stating whether the graph is acyclic.
std::string envy_graph_to_dot(const EnvyGraph& g);

json read_json_file(const std::filesystem::path& path);

struct SolveOptions {
    std::filesystem::path instance;
    std::string epsilon = "auto";
    std::size_t max_iters = EngineConfig{}.max_iterations;
    std::size_t grid = EngineConfig{}.grid_resolution;
    std::optional<std::filesystem::path> trace;
    std::size_t jobs = 1;
    bool strict = false;
};

struct HardOptions {
    std::size_t p = 1;
    std::string x1;
    std::string x2;
    std::optional<std::filesystem::path> out;
};

DisjointnessInput disjointness_input(const HardOptions& opts);

int cmd_solve(const SolveOptions& opts, std::ostream& out, std::ostream& err);
int cmd_verify(const std::filesystem::path& instance, const std::filesystem::path& allocation, std::ostream& out,
               std::ostream& err);
int cmd_envy_graph(const std::filesystem::path& instance, const std::filesystem::path& allocation,
                   std::ostream& out, std::ostream& err);
int cmd_gen_hard(const HardOptions& opts, std::ostream& out, std::ostream& err);
int cmd_verify_dichotomy(const HardOptions& opts, std::ostream& out, std::ostream& err);
int cmd_closure(const std::filesystem::path& instance, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to one command. Returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace efpe::io
