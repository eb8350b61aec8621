#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bridge_extrema/cli.hpp"
#include "bridge_extrema/rng.hpp"

using json = nlohmann::json;
using namespace bridge_extrema;
using Catch::Matchers::WithinAbs;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

std::string write_temp(const char* name, const std::string& content) {
    std::string path = std::string("cli_test_") + name + ".csv";
    std::ofstream f(path);
    f << content;
    return path;
}

}  // namespace

TEST_CASE("eval: values, bounds, argument validation", "[cli]") {
    const CliResult ks = run_cli({"eval", "--dist", "ks", "--at", "1.0"});
    REQUIRE(ks.code == 0);
    const json j = json::parse(ks.out);
    CHECK_THAT(double(j["value"]), WithinAbs(0.73000032832264548, 1e-12));
    CHECK(double(j["trunc_bound"]) <= 1e-12);
    CHECK(j["dist"] == "ks");
    CHECK(j["args"] == json::array({1.0}));

    const CliResult quot = run_cli({"eval", "--dist", "quotient", "--at", "1.0"});
    REQUIRE(quot.code == 0);
    CHECK(double(json::parse(quot.out)["value"]) == 0.5);

    const CliResult joint = run_cli({"eval", "--dist", "joint", "--at", "0.5,0.5"});
    REQUIRE(joint.code == 0);
    CHECK_THAT(double(json::parse(joint.out)["value"]),
               WithinAbs(0.036054756335124906, 1e-12));

    CHECK(run_cli({"eval", "--dist", "joint", "--at", "0.5"}).code == 2);
    CHECK(run_cli({"eval", "--dist", "ks", "--at", "0.5,0.7"}).code == 2);
    CHECK(run_cli({"eval", "--dist", "ks", "--at", "abc"}).code == 2);
    CHECK(run_cli({"eval", "--dist", "ks", "--at", "-1"}).code == 2);
    CHECK(run_cli({"eval", "--dist", "ks", "--at", "1", "--tol", "0"}).code == 2);
    CHECK(run_cli({"eval", "--dist", "nope", "--at", "1"}).code == 2);
    CHECK(run_cli({"eval", "--dist", "ks", "--at", "1", "--bogus"}).code == 2);
    CHECK(run_cli({}).code == 2);
    CHECK(run_cli({"frobnicate"}).code == 2);
}

TEST_CASE("help is printed on request", "[cli]") {
    const CliResult h = run_cli({"--help"});
    CHECK(h.code == 0);
    CHECK(h.out.find("eval") != std::string::npos);
    CHECK(h.out.find("mc-verify") != std::string::npos);
}

TEST_CASE("table matches eval bit for bit and honors --out", "[cli]") {
    const CliResult t =
        run_cli({"table", "--dist", "kuiper", "--from", "0.5", "--to", "1.5", "--step", "0.25"});
    REQUIRE(t.code == 0);
    std::istringstream rows(t.out);
    std::string line;
    REQUIRE(std::getline(rows, line));
    CHECK(line == "x,value");
    int n_rows = 0;
    while (std::getline(rows, line)) {
        const auto comma = line.find(',');
        REQUIRE(comma != std::string::npos);
        const std::string x = line.substr(0, comma), val = line.substr(comma + 1);
        const CliResult e = run_cli({"eval", "--dist", "kuiper", "--at", x});
        REQUIRE(e.code == 0);
        // same shortest-round-trip rendering on both paths
        CHECK(json::parse(e.out)["value"].dump() == val);
        ++n_rows;
    }
    CHECK(n_rows == 5);

    const std::string path = "cli_test_table_out.csv";
    const CliResult f = run_cli(
        {"table", "--dist", "kuiper", "--from", "0.5", "--to", "1.5", "--step", "0.25", "--out",
         path});
    REQUIRE(f.code == 0);
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == t.out);
    std::remove(path.c_str());

    CHECK(run_cli({"table", "--dist", "ks", "--from", "1", "--to", "0", "--step", "0.1"}).code ==
          2);
    CHECK(run_cli({"table", "--dist", "ks", "--from", "0", "--to", "1", "--step", "0"}).code == 2);
}

TEST_CASE("test subcommand: nulls, headers, warnings, bad input", "[cli]") {
    rng_stream g = make_stream(71, 0);

    // uniform data with BOM, header, CRLF line ends and a blank line
    std::string csv = "\xEF\xBB\xBFvalue\r\n";
    for (int i = 0; i < 200; ++i) csv += std::to_string(g.uniform()) + "\r\n";
    csv += "\n";
    const std::string upath = write_temp("uniform", csv);
    const CliResult u = run_cli({"test", "--file", upath, "--test", "ks", "--null", "uniform"});
    REQUIRE(u.code == 0);
    const json ju = json::parse(u.out);
    CHECK(ju["test"] == "ks");
    CHECK(double(ju["p_value"]) > 1e-3);
    CHECK(ju["small_sample_warning"] == false);
    CHECK_THAT(double(ju["stat_scaled"]),
               WithinAbs(std::sqrt(200.0) * double(ju["stat_raw"]), 1e-12));

    // normal and exponential and gamma-half nulls on matching synthetic data
    std::string ncsv;
    for (int i = 0; i < 500; ++i) ncsv += std::to_string(1.0 + 2.0 * g.normal()) + "\n";
    const std::string npath = write_temp("normal", ncsv);
    const CliResult nr =
        run_cli({"test", "--file", npath, "--test", "kuiper", "--null", "normal:1,2"});
    REQUIRE(nr.code == 0);
    CHECK(double(json::parse(nr.out)["p_value"]) > 1e-3);

    std::string ecsv;
    for (int i = 0; i < 500; ++i) ecsv += std::to_string(g.exponential() / 1.5) + "\n";
    const std::string epath = write_temp("exp", ecsv);
    const CliResult er =
        run_cli({"test", "--file", epath, "--test", "ks-plus", "--null", "exp:1.5"});
    REQUIRE(er.code == 0);
    CHECK(double(json::parse(er.out)["p_value"]) > 1e-3);
    CHECK(json::parse(er.out)["test"] == "ks-plus");

    // Z^2/(2 theta) ~ Gamma(1/2, theta)
    std::string gcsv;
    for (int i = 0; i < 1000; ++i) {
        const double z = g.normal();
        gcsv += std::to_string(z * z) + "\n";  // theta = 1/2
    }
    const std::string gpath = write_temp("gamma", gcsv);
    const CliResult gr =
        run_cli({"test", "--file", gpath, "--test", "ks", "--null", "gamma-half:0.5"});
    REQUIRE(gr.code == 0);
    CHECK(double(json::parse(gr.out)["p_value"]) > 1e-3);

    // small-sample warning goes to the diagnostic stream, not the report
    const std::string spath = write_temp("small", "0.1\n0.5\n0.9\n");
    const CliResult sr = run_cli({"test", "--file", spath, "--test", "ks", "--null", "uniform"});
    REQUIRE(sr.code == 0);
    CHECK(!sr.err.empty());
    CHECK(json::parse(sr.out)["small_sample_warning"] == true);

    CHECK(run_cli({"test", "--file", "no_such_file.csv", "--test", "ks", "--null", "uniform"})
              .code == 2);
    CHECK(run_cli({"test", "--file", upath, "--test", "ks", "--null", "cauchy"}).code == 2);
    CHECK(run_cli({"test", "--file", upath, "--test", "ks", "--null", "normal:0"}).code == 2);
    CHECK(run_cli({"test", "--file", upath, "--test", "ks", "--null", "exp:-1"}).code == 2);
    const std::string bpath = write_temp("bad", "0.1\n0.2\nnot-a-number\n0.3\n");
    CHECK(run_cli({"test", "--file", bpath, "--test", "ks", "--null", "uniform"}).code == 2);
    const std::string hpath = write_temp("header_only", "value\n\n");
    CHECK(run_cli({"test", "--file", hpath, "--test", "ks", "--null", "uniform"}).code == 2);
    for (const auto& p : {upath, npath, epath, gpath, spath, bpath, hpath})
        std::remove(p.c_str());
}

TEST_CASE("mc-verify: row schema, determinism, pass behavior", "[cli][fits]") {
    const std::vector<std::string> args = {"mc-verify", "--paths", "2000",
                                           "--steps",   "128",    "--seed", "7"};
    const CliResult a = run_cli(args);
    REQUIRE(a.code == 0);
    const json rows = json::parse(a.out);
    REQUIRE(rows.is_array());
    REQUIRE(rows.size() == 9);
    for (const auto& r : rows) {
        CHECK(r.contains("check"));
        CHECK(r.contains("closed_form"));
        CHECK(r.contains("mc_mean"));
        CHECK(r.contains("stderr"));
        CHECK(r["pass"] == true);
    }
    const CliResult b = run_cli(args);
    CHECK(a.out == b.out);  // deterministic given seed

    // the excursion fits run at a mesh fine enough for their small n here
    const CliResult exc = run_cli({"mc-verify", "--paths", "300", "--steps", "4096", "--seed",
                                   "7", "--suite", "excursion"});
    REQUIRE(exc.code == 0);
    const json erows = json::parse(exc.out);
    REQUIRE(erows.size() == 7);
    for (const auto& r : erows) CHECK(r["pass"] == true);

    CHECK(run_cli({"mc-verify", "--paths", "0"}).code == 2);
    CHECK(run_cli({"mc-verify", "--suite", "everything"}).code == 2);
}

TEST_CASE("laplace-verify: residuals on a grid, pass/fail plumbing", "[cli]") {
    const CliResult ok = run_cli({"laplace-verify", "--theta", "0.5", "--grid", "0.4:2:0.4"});
    REQUIRE(ok.code == 0);
    const json rows = json::parse(ok.out);
    REQUIRE(rows.is_array());
    // six kinds, five grid points each
    CHECK(rows.size() == 30);
    for (const auto& r : rows) {
        CHECK(r["pass"] == true);
        CHECK(std::abs(double(r["residual"])) < 1e-6);
    }
    CHECK(run_cli({"laplace-verify", "--theta", "-1"}).code == 2);
    CHECK(run_cli({"laplace-verify", "--theta", "0.5", "--grid", "oops"}).code == 2);
    CHECK(run_cli({"laplace-verify"}).code == 2);  // --theta required
}
