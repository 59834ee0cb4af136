#include "support.hpp"

#include "efpe/cli_io.hpp"

#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace efpe;
using namespace efpe::io;
using namespace efpe::testing;

namespace {

namespace fs = std::filesystem;

fs::path scratch_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("efpe_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path write_file(const std::string& name, const std::string& text) {
    const fs::path p = scratch_dir() / name;
    std::ofstream(p) << text;
    return p;
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "efpe");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

const std::string kSymmetric =
    R"({"n":2,"m":2,"utilities":{"type":"additive","items":[["1","1"],["1","1"]]},"allocations":"all_partitions"})";

const std::string kAllToFirst = R"({"p":[{"bundles":[[0,1],[]],"prob":"1"}]})";

}  // namespace

TEST_CASE("instance parsing: both utility encodings and both allocation encodings") {
    const auto additive = instance_from_json(json::parse(kSymmetric));
    CHECK(additive.instance.allocation_count() == 9);
    CHECK_FALSE(additive.closure_added);

    const json table = json::parse(R"({"n":2,"m":1,
        "utilities":{"type":"table","values":[[[0,"0"],[1,"3/2"]],[[0,"1"],[1,"2"]]]},
        "allocations":[[[0],[]],[[],[0]]]})");
    const auto t = instance_from_json(table);
    CHECK(t.instance.allocation_count() == 2);
    CHECK(t.instance.utilities().raw(0, 1) == q(3, 2));
    CHECK(t.instance.utilities()(0, 1) == 2);
}

TEST_CASE("instance parsing: swap closure and strict mode") {
    const json partial = json::parse(R"({"n":2,"m":1,
        "utilities":{"type":"additive","items":[["1"],["1"]]},
        "allocations":[[1,0]]})");
    const auto closed = instance_from_json(partial);
    CHECK(closed.closure_added);
    CHECK(closed.instance.allocation_count() == 2);
    CHECK(closed.warnings.size() == 1);
    CHECK_THROWS_AS(instance_from_json(partial, true), InputError);
}

TEST_CASE("instance parsing: errors name the offending field") {
    auto pointer_of = [](const std::string& text) -> std::string {
        try {
            instance_from_json(json::parse(text));
        } catch (const InputError& e) {
            return e.pointer();
        }
        return "<no error>";
    };
    CHECK(pointer_of(R"({"m":1,"utilities":{},"allocations":"all_partitions"})") == "/n");
    CHECK(pointer_of(R"({"n":1,"m":1,"utilities":{"type":"additive","items":[["1/0"]]},"allocations":"all_partitions"})") ==
          "/utilities/items/0/0");
    CHECK(pointer_of(R"({"n":1,"m":1,"utilities":{"type":"cubic"},"allocations":"all_partitions"})") == "/utilities/type");
    CHECK(pointer_of(R"({"n":2,"m":1,"utilities":{"type":"additive","items":[["1"],["1"]]},"allocations":[[[0],[0]]]})") ==
          "/allocations/0");
    CHECK(pointer_of(R"({"n":2,"m":1,"utilities":{"type":"additive","items":[["1"],["1"]]},"allocations":[[[3],[]]]})") ==
          "/allocations/0/0/0");
    CHECK(pointer_of(R"({"n":1,"m":1,"utilities":{"type":"table","values":[[[0,"1"]]]},"allocations":"all_partitions"})") ==
          "/utilities/values/0");
}

TEST_CASE("instance JSON round trip is exact") {
    std::mt19937_64 rng(73);
    for (int t = 0; t < 10; ++t) {
        const Instance inst = random_instance(rng, 2 + t % 2, 2);
        const json doc = instance_to_json(inst);
        const Instance back = instance_from_json(json::parse(doc.dump())).instance;
        CHECK(back.utilities() == inst.utilities());
        CHECK(back.allocations() == inst.allocations());
        CHECK(instance_to_json(back) == doc);
    }
    const auto explicit_set = instance_from_json(json::parse(R"({"n":2,"m":1,
        "utilities":{"type":"additive","items":[["1/3"],["2/7"]]},"allocations":[[[0],[]],[[],[0]]]})"));
    const Instance back = instance_from_json(instance_to_json(explicit_set.instance)).instance;
    CHECK(back.allocations() == explicit_set.instance.allocations());
    CHECK(back.utilities() == explicit_set.instance.utilities());
}

TEST_CASE("mixed allocation files") {
    const Instance inst = instance_from_json(json::parse(kSymmetric)).instance;
    const auto p = mixed_allocation_from_json(
        json::parse(R"({"p":[{"bundles":[[0],[1]],"prob":"1/2"},{"bundles":[2,1],"prob":"1/2"}]})"), inst);
    CHECK(p.support().size() == 2);
    CHECK(mixed_allocation_from_json(json{{"p", mixed_allocation_to_json(p, inst)}}, inst) == p);
    CHECK_THROWS_AS(mixed_allocation_from_json(json::parse(R"({"p":[{"bundles":[[0],[1]],"prob":"1/3"}]})"), inst),
                    InputError);
    CHECK_THROWS_AS(mixed_allocation_from_json(json::parse(R"({"p":[{"bundles":[[0],[0]],"prob":"1"}]})"), inst),
                    InputError);
}

TEST_CASE("solve command") {
    const auto sym = write_file("sym.json", kSymmetric);
    SUBCASE("symmetric instance is certified and re-verifies") {
        const auto r = run({"solve", "--instance", sym.string()});
        REQUIRE(r.code == 0);
        const json out = json::parse(r.out);
        CHECK(out["certificate"]["ef_ok"] == true);
        CHECK(out["certificate"]["pe_ok"] == true);
        CHECK(out.contains("w"));
        CHECK(out.contains("iterations"));
        CHECK(out.contains("wall_time"));
        const auto alloc = write_file("sym_out.json", r.out);
        CHECK(run({"verify", "--instance", sym.string(), "--allocation", alloc.string()}).code == 0);
    }
    SUBCASE("single player gets a point mass") {
        const auto solo = write_file(
            "solo.json", R"({"n":1,"m":2,"utilities":{"type":"additive","items":[["1","2"]]},"allocations":"all_partitions"})");
        const auto r = run({"solve", "--instance", solo.string()});
        REQUIRE(r.code == 0);
        const json out = json::parse(r.out);
        REQUIRE(out["p"].size() == 1);
        CHECK(out["p"][0]["prob"] == "1");
    }
    SUBCASE("malformed rational is an input error") {
        const auto bad = write_file(
            "bad.json", R"({"n":2,"m":1,"utilities":{"type":"additive","items":[["1/0"],["1"]]},"allocations":"all_partitions"})");
        const auto r = run({"solve", "--instance", bad.string()});
        CHECK(r.code == 1);
        CHECK(r.err.find("/utilities/items/0/0") != std::string::npos);
    }
    SUBCASE("missing file, bad flags, bad epsilon") {
        CHECK(run({"solve", "--instance", (scratch_dir() / "nope.json").string()}).code == 1);
        CHECK(run({"solve"}).code == 1);
        CHECK(run({"frobnicate"}).code == 1);
        CHECK(run({"solve", "--instance", sym.string(), "--epsilon", "1/2"}).code == 1);
        CHECK(run({"solve", "--instance", sym.string(), "--epsilon", "x"}).code == 1);
        CHECK(run({"solve", "--instance", sym.string(), "--epsilon", "1/100"}).code == 0);
    }
    SUBCASE("strict mode rejects a non-swappable list") {
        const auto partial = write_file(
            "partial.json", R"({"n":2,"m":1,"utilities":{"type":"additive","items":[["1"],["1"]]},"allocations":[[[0],[]]]})");
        const auto lenient = run({"solve", "--instance", partial.string()});
        CHECK(lenient.code == 0);
        CHECK(lenient.err.find("warning") != std::string::npos);
        CHECK(run({"solve", "--instance", partial.string(), "--strict"}).code == 1);
    }
    SUBCASE("trace is written as JSON lines") {
        const auto trace = scratch_dir() / "trace.jsonl";
        REQUIRE(run({"solve", "--instance", sym.string(), "--trace", trace.string()}).code == 0);
        std::ifstream in(trace);
        std::string line;
        int lines = 0;
        while (std::getline(in, line)) {
            const json e = json::parse(line);
            CHECK(e["nu_sum"] == "1");
            ++lines;
        }
        CHECK(lines >= 1);
    }
}

TEST_CASE("verify command") {
    const auto sym = write_file("sym.json", kSymmetric);
    SUBCASE("all to player 1 fails EF with witness (2,1)") {
        const auto alloc = write_file("all1.json", kAllToFirst);
        const auto r = run({"verify", "--instance", sym.string(), "--allocation", alloc.string()});
        CHECK(r.code == 3);
        const json c = json::parse(r.out);
        CHECK(c["ef_ok"] == false);
        CHECK(c["ef_witness"]["envious"] == 2);
        CHECK(c["ef_witness"]["envied"] == 1);
    }
    SUBCASE("split lottery passes") {
        const auto alloc = write_file(
            "lottery.json", R"({"p":[{"bundles":[[0],[1]],"prob":"1/2"},{"bundles":[[1],[0]],"prob":"1/2"}]})");
        CHECK(run({"verify", "--instance", sym.string(), "--allocation", alloc.string()}).code == 0);
    }
    SUBCASE("empty allocation fails PE with a dominator") {
        const auto alloc = write_file("empty.json", R"({"p":[{"bundles":[[],[]],"prob":"1"}]})");
        const auto r = run({"verify", "--instance", sym.string(), "--allocation", alloc.string()});
        CHECK(r.code == 3);
        const json c = json::parse(r.out);
        CHECK(c["pe_ok"] == false);
        CHECK(c["pe_dominator"].is_array());
    }
    SUBCASE("probabilities not summing to 1") {
        const auto alloc = write_file("short.json", R"({"p":[{"bundles":[[0],[1]],"prob":"1/2"}]})");
        CHECK(run({"verify", "--instance", sym.string(), "--allocation", alloc.string()}).code == 1);
    }
}

TEST_CASE("envy-graph command") {
    const auto sym = write_file("sym.json", kSymmetric);
    SUBCASE("envy-free allocation has no edges") {
        const auto alloc = write_file(
            "lottery.json", R"({"p":[{"bundles":[[0],[1]],"prob":"1/2"},{"bundles":[[1],[0]],"prob":"1/2"}]})");
        const auto r = run({"envy-graph", "--instance", sym.string(), "--allocation", alloc.string()});
        CHECK(r.code == 0);
        CHECK(r.out.rfind("// acyclic: true", 0) == 0);
        CHECK(r.out.find("->") == std::string::npos);
    }
    SUBCASE("all to player 1 gives the single edge 2 -> 1") {
        const auto alloc = write_file("all1.json", kAllToFirst);
        const auto r = run({"envy-graph", "--instance", sym.string(), "--allocation", alloc.string()});
        CHECK(r.out.find("2 -> 1 [label=\"1\"]") != std::string::npos);
        CHECK(r.out.find("1 -> 2") == std::string::npos);
    }
    SUBCASE("three-player chain matches the library graph") {
        const auto chain = write_file("chain.json", R"({"n":3,"m":2,
            "utilities":{"type":"additive","items":[["1","0"],["1","1"],["0","1"]]},"allocations":"all_partitions"})");
        const auto alloc = write_file("chain_alloc.json", R"({"p":[{"bundles":[[],[0],[1]],"prob":"1"}]})");
        const auto r = run({"envy-graph", "--instance", chain.string(), "--allocation", alloc.string()});
        REQUIRE(r.code == 0);
        const Instance inst = load_instance(chain).instance;
        const auto p = mixed_allocation_from_json(read_json_file(alloc), inst);
        CHECK(r.out == envy_graph_to_dot(build_envy_graph(p, inst)));
        CHECK(r.out.find("1 -> 2") != std::string::npos);
    }
}

TEST_CASE("gen-hard, verify-dichotomy and closure commands") {
    const auto r = run({"gen-hard", "--p", "2", "--x1", "100", "--x2", "010"});
    REQUIRE(r.code == 0);
    const json inst = json::parse(r.out);
    CHECK(inst["m"] == 4);
    CHECK(inst["allocations"] == "all_partitions");
    const auto out = scratch_dir() / "hard.json";
    CHECK(run({"gen-hard", "--p", "1", "--x1", "1", "--x2", "0", "--out", out.string()}).code == 0);
    CHECK(fs::exists(out));
    CHECK(run({"gen-hard", "--p", "2", "--x1", "10", "--x2", "010"}).code == 1);
    CHECK(run({"gen-hard", "--p", "2", "--x1", "1x0", "--x2", "010"}).code == 1);

    const auto d = run({"verify-dichotomy", "--p", "2", "--x1", "100", "--x2", "100"});
    CHECK(d.code == 0);
    CHECK(json::parse(d.out)["holds"] == true);

    const auto partial = write_file(
        "partial.json", R"({"n":3,"m":2,"utilities":{"type":"additive","items":[["1","1"],["1","1"],["1","1"]]},"allocations":[[[0],[1],[]]]})");
    const auto c = run({"closure", "--instance", partial.string()});
    CHECK(c.code == 0);
    CHECK(json::parse(c.out)["allocations"].size() == 6);
}
