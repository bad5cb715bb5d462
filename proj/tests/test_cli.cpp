#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "test_support.hpp"

namespace fs = std::filesystem;
using Catch::Approx;

namespace {

fs::path workdir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "depbound_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string cli() {
    const char* env = std::getenv("DEPBOUND_CLI");
    return env ? env : "depbound";
}

int run(const std::string& args) {
    const std::string cmd = cli() + " " + args + " >" + (workdir() / "stdout.txt").string() + " 2>" +
                            (workdir() / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_file(const std::string& name, const std::string& text) {
    const auto p = workdir() / name;
    std::ofstream out(p, std::ios::binary);
    out << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

// Rows of a CSV whose last column is a quoted JSON field.
std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cur;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if (quoted) {
                if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else if (c == '"') {
                    quoted = false;
                } else {
                    cur += c;
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                cells.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        cells.push_back(cur);
        rows.push_back(cells);
    }
    return rows;
}

const std::string kTwoUniforms = R"({"version": 1, "aggregation": "sum",
  "marginals": {"kind": "uniform", "count": 2, "nodes": 100000},
  "levels": [0.95], "ra": {"N": 10000, "restarts": 1}})";

}  // namespace

TEST_CASE("standard subcommand") {
    const auto cfg = write_file("uniform.json", kTwoUniforms);
    const auto out = workdir() / "standard";
    REQUIRE(run("standard --config " + cfg.string() + " --out " + out.string()) == 0);
    const auto rows = read_csv(out / "standard.csv");
    REQUIRE(rows.size() == 1);
    CHECK(std::stod(rows[0][2]) == Approx(1.95).margin(1e-3));
    CHECK(std::stod(rows[0][4]) == Approx(1.95).margin(0.01));
    const auto meta = nlohmann::json::parse(rows[0].back());
    CHECK(meta["N"] == 10000);
    CHECK(meta.contains("seed"));
}

TEST_CASE("config errors exit with code 2") {
    const auto empty_levels = write_file("empty_levels.json", R"({"version": 1, "marginals": {"kind": "pareto2", "count": 2}, "levels": []})");
    CHECK(run("standard --config " + empty_levels.string() + " --out " + (workdir() / "x").string()) == 2);
    const auto no_version = write_file("no_version.json", R"({"marginals": {"kind": "pareto2", "count": 2}, "levels": [0.9]})");
    CHECK(run("standard --config " + no_version.string()) == 2);
    const auto broken = write_file("broken.json", "{\"version\": 1,\n \"levels\": [0.9,\n}");
    CHECK(run("standard --config " + broken.string()) == 2);
    CHECK(slurp(workdir() / "stderr.txt").find("broken.json:3") != std::string::npos);
    const auto bad_field = write_file("bad_field.json", R"({"version": 1, "marginals": {"kind": "lognormal"}, "levels": [0.9]})");
    CHECK(run("standard --config " + bad_field.string()) == 2);
    CHECK(slurp(workdir() / "stderr.txt").find("marginals.kind") != std::string::npos);
    CHECK(run("standard") == 2);
    CHECK(run("reproduce table7") == 2);
    CHECK(run("standard --config " + empty_levels.string() + " --bogus") == 2);
}

TEST_CASE("prescription subcommand") {
    const auto none = write_file("none.csv", "");
    const auto cfg = write_file("presc.json", R"({"version": 1, "dim": 2, "prescription": {"file": "none.csv", "grid": 4}})");
    const auto out = workdir() / "presc";
    REQUIRE(run("prescription --config " + cfg.string() + " --out " + out.string()) == 0);
    const auto rows = read_csv(out / "prescription_surface.csv");
    CHECK(rows.size() == 25);
    for (const auto& r : rows) {
        CHECK(std::stod(r[2]) == Approx(std::stod(r[4])));
        CHECK(std::stod(r[3]) == Approx(std::stod(r[5])));
    }
    write_file("pinned.csv", "0.5,0.5,0.25\n");
    const auto pinned = write_file("pinned.json", R"({"version": 1, "dim": 2, "prescription": {"file": "pinned.csv", "grid": 4}})");
    REQUIRE(run("prescription --config " + pinned.string() + " --out " + out.string()) == 0);
    for (const auto& r : read_csv(out / "prescription_surface.csv"))
        if (r[0] == "0.5" && r[1] == "0.5") {
            CHECK(std::stod(r[2]) == Approx(0.25));
            CHECK(std::stod(r[3]) == Approx(0.25));
        }
    write_file("bad.csv", "0.5,0.5,0.75\n");
    const auto bad = write_file("bad.json", R"({"version": 1, "dim": 2, "prescription": {"file": "bad.csv"}})");
    CHECK(run("prescription --config " + bad.string() + " --out " + out.string()) == 3);
}

TEST_CASE("prescription grid from a reference copula nests inside the frechet interval") {
    // independence values at the 27 interior lattice points {1/4, 1/2, 3/4}^3; the
    // levels sit where the diagonal of the prescribed region matters
    std::ostringstream csv;
    for (double a : {0.25, 0.5, 0.75})
        for (double b : {0.25, 0.5, 0.75})
            for (double c : {0.25, 0.5, 0.75}) csv << a << ',' << b << ',' << c << ',' << a * b * c << '\n';
    write_file("grid27.csv", csv.str());
    const auto cfg = write_file("grid27.json", R"({"version": 1, "aggregation": "max",
      "marginals": {"kind": "pareto2", "count": 3}, "levels": [0.3, 0.5],
      "prescription": {"file": "grid27.csv", "grid": 4}})");
    const auto out = workdir() / "grid27";
    REQUIRE(run("prescription --config " + cfg.string() + " --out " + out.string()) == 0);
    for (const auto& r : read_csv(out / "prescription_var.csv")) {
        const double unc_lo = std::stod(r[1]), unc_hi = std::stod(r[2]), imp_lo = std::stod(r[3]), imp_hi = std::stod(r[4]);
        CHECK(imp_lo >= unc_lo - 1e-9);
        CHECK(imp_hi <= unc_hi + 1e-9);
        CHECK(imp_hi - imp_lo < unc_hi - unc_lo);
    }
}

TEST_CASE("distance ball with zero radius collapses to the reference") {
    const auto cfg = write_file("ball0.json", R"({"version": 1, "aggregation": "max",
      "marginals": {"kind": "pareto2", "count": 3}, "levels": [0.9, 0.99],
      "reference": {"kind": "independence"}, "ball": {"distance": "ks", "delta": 0.0}})");
    const auto out = workdir() / "ball0";
    REQUIRE(run("distance-ball --config " + cfg.string() + " --out " + out.string()) == 0);
    const auto rows = read_csv(out / "distance_ball.csv");
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        const double alpha = std::stod(r[0]);
        const double exact = depbound::testing::pareto_quantile(std::cbrt(alpha));
        CHECK(std::stod(r[4]) == Approx(exact).epsilon(1e-7));
        CHECK(std::stod(r[5]) == Approx(exact).epsilon(1e-7));
    }
}

TEST_CASE("extremal with singletons only matches the standard rearrangement") {
    const std::string body = R"("marginals": {"kind": "pareto2", "count": 3}, "levels": [0.95],
      "ra": {"N": 2000, "restarts": 1}, "seed": 5)";
    const auto std_cfg = write_file("std3.json", "{\"version\": 1, " + body + "}");
    const auto ext_cfg = write_file("ext3.json", "{\"version\": 1, \"subsets\": [], \"mode\": \"max\", \"search\": {\"candidates\": 5}, " + body + "}");
    const auto out = workdir() / "ext";
    REQUIRE(run("standard --config " + std_cfg.string() + " --out " + out.string()) == 0);
    REQUIRE(run("extremal --config " + ext_cfg.string() + " --out " + out.string()) == 0);
    const auto s = read_csv(out / "standard.csv");
    const auto e = read_csv(out / "extremal.csv");
    REQUIRE(s.size() == 1);
    REQUIRE(e.size() == 1);
    CHECK(std::stod(e[0][3]) == Approx(std::stod(s[0][3])).epsilon(1e-12));
    CHECK(std::stod(e[0][4]) == Approx(std::stod(s[0][4])).epsilon(1e-12));
}

TEST_CASE("strict mode reports non-convergence") {
    const auto cfg = write_file("strict.json", R"({"version": 1, "marginals": {"kind": "pareto2", "count": 5},
      "levels": [0.99], "ra": {"N": 3000, "max_sweeps": 1, "restarts": 1}})");
    const auto out = workdir() / "strict";
    CHECK(run("standard --config " + cfg.string() + " --out " + out.string()) == 0);
    CHECK(run("standard --strict --config " + cfg.string() + " --out " + out.string()) == 4);
}

TEST_CASE("reproduce is byte-identical across runs") {
    const auto a = workdir() / "rep_a", b = workdir() / "rep_b";
    REQUIRE(run("reproduce table3 --out " + a.string()) == 0);
    REQUIRE(run("reproduce table3 --out " + b.string() + " --threads 2") == 0);
    for (const char* f : {"table3.csv", "table3.json", "table3_comparison.csv"}) CHECK(slurp(a / f) == slurp(b / f));
    const auto c = workdir() / "rep_c";
    REQUIRE(run("reproduce table3 --seed 99 --out " + c.string()) == 0);
    CHECK(slurp(a / "table3.csv") != slurp(c / "table3.csv"));
}
