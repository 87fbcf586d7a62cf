#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "spotcheck/analytic.hpp"
#include "spotcheck/calibration.hpp"
#include "spotcheck/core.hpp"
#include "spotcheck/io.hpp"

using nlohmann::json;
using namespace spotcheck;

namespace {

namespace fs = std::filesystem;

const fs::path kTmp = SPOTCHECK_TEST_TMP;

std::string path(const std::string& name) {
    fs::create_directories(kTmp);
    return (kTmp / name).string();
}

struct Run {
    int code;
    std::string out;
};

Run cli(const std::string& args) {
    const std::string out = path("stdout.txt");
    const std::string cmd = std::string("\"") + SPOTCHECK_CLI + "\" " + args + " > \"" + out + "\" 2> \"" +
                            path("stderr.txt") + "\"";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, io::read_file(out)};
}

json cli_json(const std::string& args) {
    const Run r = cli(args);
    REQUIRE(r.code == 0);
    return r.out.empty() ? json::object() : json::parse(r.out);
}

void write(const std::string& name, const std::string& content) { io::atomic_write(path(name), content); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("calibrate") {
    write("two.txt", "0\n1\n");
    const json j = cli_json("calibrate --input " + path("two.txt"));
    CHECK(j["spec_version"] == "1.0");
    CHECK(j["theta_e"].get<double>() == 0.5);
    CHECK(j["sigma2_e"].get<double>() == 0.5);
    CHECK(cli("calibrate --input " + path("missing.txt")).code == 2);
    CHECK(io::read_file(path("stderr.txt")).rfind("error: InvalidInput:", 0) == 0);
}

TEST_CASE("construct") {
    const json j = cli_json("construct --method fixed --u 1 --omega 0.1 --epsilon 0.01 --n 10000");
    const ExtremalEF ef = tightness_ef_bounded(1.0, 0.1, 0.01, 1e4);
    CHECK(j["beta"].get<double>() == ef.beta);
    CHECK(j["t"].get<double>() == ef.t);
    CHECK(j["method_used"] == "fixed");
    const json m = cli_json("construct --method moments --theta-e 0.5 --sigma2-e 0.25 --n 10000");
    CHECK(std::abs(m["beta"].get<double>() - 0.0202331) < 1e-6);
    // Below the moment threshold the tightness construction takes over unless disabled.
    const json f = cli_json("construct --method moments --theta-e 0.5 --sigma2-e 0.25 --n 50");
    CHECK(f["method_used"] == "tightness");
    CHECK(cli("construct --method moments --theta-e 0.5 --sigma2-e 0.25 --n 50 --no-fallback").code == 3);
    CHECK(cli("construct --method gap --theta-e 0.5 --sigma2-e 0.25 --delta-th 5").code == 3);
    CHECK(cli("construct --method bogus").code == 2);
}

TEST_CASE("analyze") {
    write("unchecked.csv", "i,y,x\n0,1,\n1,1,\n2,1,\n");
    cli_json("construct --method fixed --u 1 --n 100 --output " + path("ef.json"));
    const double beta = json::parse(io::read_file(path("ef.json")))["beta"].get<double>();
    const ExtremalEF ef = ExtremalEF{beta, json::parse(io::read_file(path("ef.json")))["t"].get<double>(), 0.1, 0.0};
    const json a = cli_json("analyze --records " + path("unchecked.csv") + " --ef " + path("ef.json"));
    const double expect = (3.0 * std::log(ef.t) + std::log(0.01)) / beta;
    CHECK(a["report"]["s_lb"].get<double>() == doctest::Approx(expect).epsilon(1e-12));
    CHECK(a["report"]["c_n"] == 3);
    write("nonbinary.csv", "i,y,x\n0,0,0.3\n1,1,\n");
    CHECK(cli("analyze --records " + path("nonbinary.csv") + " --method gocanin --chsh --omega 0.1 --epsilon 0.01").code == 3);
    CHECK(cli("analyze --records " + path("unchecked.csv") + " --ef " + path("ef.json") + " --expect-beta 0.5")
              .code == 4);
    CHECK(cli("analyze --records " + path("unchecked.csv") + " --ef " + path("ef.json") + " --expect-beta " +
              io::format_double(beta))
              .code == 0);
}

TEST_CASE("plan") {
    const json g = cli_json("plan --mode min-trials --method gocanin --i-hat 2.7 --delta-th 0.0098");
    CHECK(g["results"][0]["divergent"] == true);
    CHECK(g["results"][0]["n_min"].is_null());
    const json e = cli_json("plan --mode early-stop --m 1000 --omega 0.1 --gamma 13.815510557964274");
    CHECK(e["n"] == 1213);
}

TEST_CASE("simulate is deterministic") {
    const std::string a = path("sim_a"), b = path("sim_b");
    REQUIRE(cli("simulate fig1 --n 1000 --reps 3 --seed 7 --grid 2.5,2.7 --quiet --out-dir " + a).code == 0);
    REQUIRE(cli("simulate fig1 --n 1000 --reps 3 --seed 7 --grid 2.5,2.7 --quiet --out-dir " + b).code == 0);
    for (const char* f : {"fig1_per_rep.csv", "fig1_summary.csv", "fig1_diffs.csv"})
        CHECK(io::read_file(a + "/" + f) == io::read_file(b + "/" + f));
    const json cfg = json::parse(io::read_file(a + "/fig1_config.json"));
    CHECK(cfg["seed"] == 7);
}

TEST_CASE("calibrate, construct and analyze compose like the library") {
    std::ostringstream samples;
    for (int i = 0; i < 50; ++i) samples << (i % 4 == 0 ? 0.0 : 2.0) << "\n";
    write("cal.txt", samples.str());
    cli_json("calibrate --input " + path("cal.txt") + " --output " + path("cal.json"));
    cli_json("construct --method moments --calibration " + path("cal.json") +
             " --n 2000 --omega 0.1 --output " + path("ef2.json"));
    std::ostringstream recs;
    recs << "i,y,x\n";
    std::vector<TrialRecord> lib_recs;
    for (int i = 0; i < 2000; ++i) {
        const bool checked = i % 10 == 0;
        const double x = i % 3 == 0 ? 0.0 : 2.0;
        recs << i << ',' << (checked ? 0 : 1) << ',';
        if (checked) recs << x;
        recs << "\n";
        lib_recs.push_back(checked ? TrialRecord{static_cast<std::uint64_t>(i), 0, x}
                                   : TrialRecord{static_cast<std::uint64_t>(i), 1, std::nullopt});
    }
    write("recs.csv", recs.str());
    const json a = cli_json("analyze --records " + path("recs.csv") + " --ef " + path("ef2.json"));

    std::vector<double> xs;
    for (int i = 0; i < 50; ++i) xs.push_back(i % 4 == 0 ? 0.0 : 2.0);
    const auto cal = estimate_pooled(xs);
    const ExtremalEF ef = moment_ef(MomentSpec{cal.theta_e, cal.sigma2_e, std::nullopt, std::nullopt}, 0.1, 0.01, 2000);
    const auto r = confidence_bound(lib_recs, ef, 0.01);
    CHECK(a["report"]["s_lb"].get<double>() == doctest::Approx(r.s_lb).epsilon(1e-12));
}

}  // TEST_SUITE
