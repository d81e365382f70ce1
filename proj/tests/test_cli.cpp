#include "doctest.h"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dpre/cli.hpp"

using namespace dpre::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args)
{
    args.insert(args.begin(), "dpre");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    const int code = dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / "dpre_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write(const fs::path& p, const std::string& text)
{
    std::ofstream(p, std::ios::binary) << text;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

} // namespace

TEST_CASE("help and usage errors")
{
    CHECK(run({"--help"}).code == kExitOk);
    CHECK(run({"sample", "--help"}).code == kExitOk);
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"nonsense"}).code == kExitUsage);
    const auto bad = run({"graph-info", "--n", "3", "--frobnicate", "1"});
    CHECK(bad.code == kExitUsage);
    CHECK(bad.err.find("Usage") != std::string::npos);
    CHECK(run({"graph-info"}).code == kExitUsage);
    CHECK(run({"graph-info", "--n", "x"}).code == kExitUsage);
    CHECK(run({"sample", "--n", "3"}).code == kExitUsage);
    CHECK(run({"sample", "--n", "3", "--beta", "0.1", "--schedule", "exactv"}).code == kExitUsage);
    CHECK(run({"sample", "--n", "3", "--beta", "0.1", "--law", "cauchy"}).code == kExitUsage);
}

TEST_CASE("graph-info")
{
    const auto r = run({"graph-info", "--b", "2", "--s", "2", "--n", "3"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("edge_count 64\n") != std::string::npos);
    CHECK(r.out.find("vertex_count_nonroot 42\n") != std::string::npos);
    CHECK(r.out.find("path_count 128\n") != std::string::npos);
    CHECK(run({"graph-info", "--n", "40"}).code == kExitNumeric);
}

TEST_CASE("resource guard exits with 2")
{
    CHECK(run({"sample", "--b", "2", "--n", "99"}).code == kExitNumeric);
    CHECK(run({"sample", "--b", "2", "--n", "14", "--beta", "0.1", "--replicates", "1000000"}).code ==
          kExitNumeric);
}

TEST_CASE("config parsing")
{
    std::istringstream in("# comment\n\nb = 3   # trailing\n  law=twopoint:0.2\nm-max = 5\n");
    const auto entries = parse_config(in, "cfg");
    REQUIRE(entries.size() == 3);
    CHECK(entries[0].key == "b");
    CHECK(entries[0].value == "3");
    CHECK(entries[0].line == 3);
    CHECK(entries[1].value == "twopoint:0.2");
    CHECK(entries[2].key == "m_max");

    std::istringstream missing_eq("b = 2\njunk\n");
    try {
        parse_config(missing_eq, "cfg");
        FAIL("expected a parse error");
    } catch (const UsageError& e) {
        CHECK(std::string(e.what()).find("cfg:2") != std::string::npos);
    }
    std::istringstream dup("b = 2\nb = 3\n");
    CHECK_THROWS_AS(parse_config(dup, "cfg"), UsageError);
    std::istringstream empty_value("b =\n");
    CHECK_THROWS_AS(parse_config(empty_value, "cfg"), UsageError);
    CHECK_THROWS_AS(load_config(scratch("does_not_exist.cfg").string()), UsageError);
}

TEST_CASE("config precedence and unknown keys")
{
    const auto empty = scratch("empty.cfg");
    write(empty, "");
    const auto plain = run({"graph-info", "--n", "2", "--config", empty.string()});
    CHECK(plain.code == kExitOk);
    CHECK(first_line(plain.out) == "b 2");

    const auto cfg = scratch("b2.cfg");
    write(cfg, "b = 2\nn = 2\n");
    CHECK(first_line(run({"graph-info", "--config", cfg.string()}).out) == "b 2");
    CHECK(first_line(run({"graph-info", "--config", cfg.string(), "--b", "3"}).out) == "b 3");

    const auto bogus = scratch("bogus.cfg");
    write(bogus, "n = 2\nbogus = 1\n");
    const auto r = run({"graph-info", "--config", bogus.string()});
    CHECK(r.code == kExitUsage);
    CHECK(r.err.find("bogus") != std::string::npos);
    CHECK(r.err.find(":2:") != std::string::npos);
}

TEST_CASE("shortest round-trip formatting")
{
    CHECK(format_real(0.1) == "0.1");
    CHECK(format_real(1.0) == "1");
    CHECK(format_real(-2.5e-300) == "-2.5e-300");
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        const auto text = format_real(x);
        double back = 0.0;
        std::from_chars(text.data(), text.data() + text.size(), back);
        REQUIRE(back == x);
    }
    CHECK(hex64(fnv1a("")) == "cbf29ce484222325");
    CHECK(hex64(fnv1a("a")) == "af63dc4c8601ec8c");
}

TEST_CASE("CSV outputs start with a header")
{
    struct Case {
        std::vector<std::string> args;
        std::string header;
    };
    const std::vector<Case> cases{
        {{"variance-flow", "--n", "50"}, "n,r,value,residual"},
        {{"variance-flow", "--n", "5", "--b", "2", "--s", "3", "--v", "0.01"}, "n,r,value,residual"},
        {{"rfunc", "--grid", "1e5"}, "n,r,value,residual"},
        {{"rfunc", "--s", "3", "--r", "1"}, "n,r,value,residual"},
        {{"asymptotics", "--kind", "l2gap", "--grid", "1000,2000"}, "n,r,value,residual"},
        {{"moments", "--n", "4", "--beta", "0.2"}, "n,k,m,raw_moment,centered_moment"},
        {{"moments", "--n", "100", "--schedule", "exactv", "--stride", "50"},
         "n,k,m,raw_moment,centered_moment"},
        {{"identity-check", "--n", "2"}, "replicate,exact,pathsum,conditional,identity_rhs,rel_error"},
    };
    for (const auto& c : cases) {
        const auto r = run(c.args);
        CHECK(r.code == kExitOk);
        CHECK(first_line(r.out) == c.header);
    }
    CHECK(run({"sample", "--n", "3", "--beta", "0.2", "--replicates", "100", "--resamples", "50",
               "--out", "-"})
              .out.rfind("replicate,w\n", 0) == 0);
}

TEST_CASE("check-mode exit codes")
{
    CHECK(run({"identity-check", "--n", "3", "--level", "2", "--seeds", "5"}).code == kExitOk);
    CHECK(run({"asymptotics", "--kind", "l2gap", "--grid", "1000,10000", "--check"}).code == kExitOk);
    CHECK(run({"asymptotics", "--kind", "prop22", "--grid", "1000,10000", "--check"}).code ==
          kExitCheckFailed);
    CHECK(run({"asymptotics", "--kind", "nope"}).code == kExitUsage);
}

TEST_CASE("manifest replay reproduces outputs")
{
    const auto csv = scratch("run.csv");
    const auto summary = scratch("run.json");
    const auto r = run({"sample", "--b", "2", "--n", "4", "--beta", "0.4", "--replicates", "300",
                        "--resamples", "200", "--seed", "99", "--threads", "2", "--out",
                        csv.string(), "--summary", summary.string()});
    REQUIRE(r.code == kExitOk);
    const auto manifest = fs::path(csv.string() + ".manifest");
    REQUIRE(fs::exists(manifest));
    const auto text = slurp(manifest);
    CHECK(text.find("seed = 99\n") != std::string::npos);
    CHECK(text.find("threads") == std::string::npos);
    CHECK(text.find("# output: " + csv.string()) != std::string::npos);

    const auto csv2 = scratch("replay.csv");
    const auto summary2 = scratch("replay.json");
    const auto replay = run({"sample", "--config", manifest.string(), "--threads", "1", "--out",
                             csv2.string(), "--summary", summary2.string()});
    REQUIRE(replay.code == kExitOk);
    CHECK(slurp(csv) == slurp(csv2));
    CHECK(slurp(summary) == slurp(summary2));
    CHECK(slurp(summary).find("\"manifest_digest\"") != std::string::npos);

    const auto flow = scratch("flow.csv");
    REQUIRE(run({"variance-flow", "--n", "2000", "--r", "-1", "--stride", "10", "--out",
                 flow.string()})
                .code == kExitOk);
    const auto flow2 = scratch("flow2.csv");
    REQUIRE(run({"variance-flow", "--config", flow.string() + ".manifest", "--out", flow2.string()})
                .code == kExitOk);
    CHECK(slurp(flow) == slurp(flow2));
    CHECK(slurp(flow).rfind("n,r,value,residual\n", 0) == 0);
}

TEST_CASE("thread count does not change outputs")
{
    std::vector<std::string> outputs;
    for (const char* threads : {"1", "8"}) {
        const auto csv = scratch(std::string("t") + threads + ".csv");
        const auto json = scratch(std::string("t") + threads + ".json");
        REQUIRE(run({"sample", "--n", "4", "--beta", "0.5", "--replicates", "500", "--resamples",
                     "300", "--threads", threads, "--out", csv.string(), "--summary", json.string()})
                    .code == kExitOk);
        outputs.push_back(slurp(csv) + slurp(json));
    }
    CHECK(outputs[0] == outputs[1]);

    ::setenv("DPRE_THREADS", "0", 1);
    CHECK(run({"sample", "--n", "3", "--beta", "0.1", "--replicates", "100"}).code == kExitUsage);
    ::setenv("DPRE_THREADS", "3", 1);
    CHECK(run({"sample", "--n", "3", "--beta", "0.1", "--replicates", "100", "--resamples", "10"})
              .code == kExitOk);
    ::unsetenv("DPRE_THREADS");
}
