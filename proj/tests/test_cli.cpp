#include "mecdelay/report.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

const fs::path work = fs::path(MECDELAY_TEST_DIR) / "cli_work";

int cli(const std::string& args) {
    const std::string cmd = std::string(MECDELAY_CLI) + " " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("exit codes") {
    fs::create_directories(work);
    CHECK(cli("--list-presets") == 0);
    CHECK(cli("run --preset nope") == 2);
    CHECK(cli("run") == 2);
    CHECK(cli("run --preset case1 --config x.json") == 2);
    CHECK(cli("run --preset case1 --method lu") == 2);
    CHECK(cli("run --preset case1 --format xml") == 2);
    CHECK(cli("run --preset case1 --mode fast") == 2);
    CHECK(cli("run --bogus-flag") == 2);
    CHECK(cli("run --config " + (work / "missing.json").string()) == 2);
    {
        std::ofstream(work / "bad.json") << R"({"buffers": {"N1": 3, "N2": 2}})";
    }
    CHECK(cli("run --config " + (work / "bad.json").string()) == 2);
    // a reducible arrival chain is rejected before any solve
    {
        std::ofstream(work / "stuck.json") << R"({
  "buffers": {"N1": 1, "N2": 2},
  "arrival": {"D0": [[0.5, 0.0], [0.0, 0.5]], "D1": [[0.5, 0.0], [0.0, 0.5]]},
  "transmission": {"alpha": [1.0], "T": [[0.5]]},
  "computation": {"alpha": [1.0], "T": [[0.5]]},
  "vacation": {"alpha": [1.0], "T": [[0.5]]}
})";
    }
    CHECK(cli("run --config " + (work / "stuck.json").string() + " --out " + (work / "stuck").string()) == 2);
    CHECK(cli("run --preset case1 --n-max 5 --out " + (work / "trunc").string()) == 0);
    CHECK(cli("run --preset case1 --mode simulate --seed 3 --out " + (work / "sim").string() + " --quiet --threads 2") == 0);
}

TEST_CASE("slot budget exhaustion exits with code 4") {
    const fs::path cfg = work / "budget.json";
    auto c = mecdelay::preset("case2");
    c.simulation->relative_accuracy = 1e-5;
    c.simulation->replication_slots = 20000;
    c.simulation->max_slots = 200000;
    c.simulation->warmup = 100;
    fs::create_directories(work);
    std::ofstream(cfg) << mecdelay::serialize_config(c);
    CHECK(cli("run --config " + cfg.string() + " --mode both --out " + (work / "budget").string()) == 4);
    CHECK(fs::exists(work / "budget" / "case2.json"));
}

TEST_CASE("outputs are written and byte-identical across runs") {
    const fs::path a = work / "a", b = work / "b";
    REQUIRE(cli("run --preset case2 --out " + a.string()) == 0);
    REQUIRE(cli("run --preset case2 --out " + b.string()) == 0);
    for (const char* f : {"case2.json", "case2_series.csv", "case2_summary.csv", "case2_bounds.csv"}) {
        INFO(f);
        REQUIRE(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    const auto t = mecdelay::read_csv(slurp(a / "case2_bounds.csv"));
    CHECK(t.rows.size() == 8);
    CHECK(std::abs(t.number(7, "analytic") - 0.0002) < 5e-4);

    REQUIRE(cli("run --preset case1 --format csv --dump-kernel --out " + (work / "c").string()) == 0);
    CHECK(!fs::exists(work / "c" / "case1.json"));
    CHECK(fs::exists(work / "c" / "case1_kernel.csv"));

    REQUIRE(cli("sweep --preset sweep-low-load --out " + (work / "s").string()) == 0);
    CHECK(mecdelay::read_csv(slurp(work / "s" / "sweep-low-load_sweep.csv")).rows.size() == 10);
    REQUIRE(cli("pmf --preset pmf-figs --format csv --out " + (work / "p").string()) == 0);
    CHECK(mecdelay::read_csv(slurp(work / "p" / "pmf-figs_pmf_summary.csv")).rows.size() == 6);

    CHECK(cli("--print-preset case1") == 0);
    CHECK(cli("--print-preset nope") == 2);
}
