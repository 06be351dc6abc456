// End-to-end tests for the star_spectra command line tool.  The binary under
// test is passed as the first program argument (the CTest registration does
// this); the remaining arguments go to the Catch2 session as usual.

#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

std::string& cli_binary_path() {
    static std::string path = "./star_spectra";
    return path;
}

fs::path scratch_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("star_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path scratch_file(const std::string& stem) {
    static int counter = 0;
    return scratch_dir() / (stem + "_" + std::to_string(counter++));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CommandResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

// Runs the CLI through the shell so tests can prepend environment settings.
CommandResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    const fs::path out_path = scratch_file("out");
    const fs::path err_path = scratch_file("err");
    std::string cmd = env_prefix + (env_prefix.empty() ? "" : " ") + "\"" +
                      cli_binary_path() + "\" " + args + " > \"" +
                      out_path.string() + "\" 2> \"" + err_path.string() + "\"";
    const int status = std::system(cmd.c_str());
    CommandResult res;
    if (status == -1)
        res.exit_code = -1;
    else if (WIFEXITED(status))
        res.exit_code = WEXITSTATUS(status);
    else
        res.exit_code = 128;
    res.out = slurp(out_path);
    res.err = slurp(err_path);
    return res;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> csv_cells(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

// Column-header line and the data rows below it (comment lines stripped).
std::vector<std::string> table_lines(const std::string& text) {
    std::vector<std::string> rows;
    for (const std::string& line : split_lines(text))
        if (!line.empty() && line[0] != '#') rows.push_back(line);
    return rows;
}

}  // namespace

TEST_CASE("solve reports the symmetric three-star in json") {
    const CommandResult res = run_cli("solve --symmetric -N 3 -L 1 --alpha 5");
    REQUIRE(res.exit_code == 0);
    const json j = json::parse(res.out);
    CHECK(j["version"] == "1.0.0");
    CHECK(j["config"]["command"] == "solve");
    CHECK(j["config"]["num-edges"] == "3");
    CHECK(j["mesh"]["points_per_edge"] == 48);
    CHECK(j["lambda1"].get<double>() == Approx(-8.033669576802044).margin(1e-9));
    CHECK(j["kappa_star"].get<double>() == Approx(2.8343728718716674).margin(1e-9));
    CHECK(std::abs(j["bs_residual"].get<double>()) <= 1e-10);
    const double lo = j["bracket"][0].get<double>();
    const double hi = j["bracket"][1].get<double>();
    CHECK(lo < j["kappa_star"].get<double>());
    CHECK(hi > j["kappa_star"].get<double>());
}

TEST_CASE("solve csv format emits key,value rows") {
    const CommandResult res = run_cli("solve --symmetric -N 3 --format csv");
    REQUIRE(res.exit_code == 0);
    CHECK_THAT(res.out, ContainsSubstring("# star_spectra 1.0.0"));
    CHECK_THAT(res.out, ContainsSubstring("lambda1,-8.0336695768020441"));
    CHECK_THAT(res.out, ContainsSubstring("kappa_star,"));
    CHECK_THAT(res.out, ContainsSubstring("bs_residual,"));
}

TEST_CASE("usage errors exit nonzero and name the problem") {
    const CommandResult bad_n = run_cli("solve -N 1 --symmetric");
    CHECK(bad_n.exit_code == 1);
    CHECK_THAT(bad_n.err, ContainsSubstring("N must be >= 2"));

    const CommandResult no_sub = run_cli("");
    CHECK(no_sub.exit_code == 1);

    const CommandResult unknown = run_cli("frobnicate");
    CHECK(unknown.exit_code == 1);
    CHECK_FALSE(unknown.err.empty());

    const CommandResult no_shape = run_cli("solve -N 3");
    CHECK(no_shape.exit_code == 1);
    CHECK_THAT(no_shape.err, ContainsSubstring("angles"));

    const CommandResult version = run_cli("--version");
    CHECK(version.exit_code == 0);
    CHECK_THAT(version.out, ContainsSubstring("1.0.0"));
}

TEST_CASE("inequality csv is exact on the symmetric star and matches frac units") {
    const CommandResult sym = run_cli("inequality -N 4 --symmetric");
    REQUIRE(sym.exit_code == 0);
    const auto rows = table_lines(sym.out);
    REQUIRE(rows.size() == 4);  // header + m = 1..3
    CHECK(rows[0] == "m,lhs,rhs,slack");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto cells = csv_cells(rows[i]);
        REQUIRE(cells.size() == 4);
        CHECK(cells[0] == std::to_string(i));
        CHECK(std::abs(std::stod(cells[3])) <= 1e-12);
    }

    const CommandResult frac =
        run_cli("inequality -N 4 --angles 0.25,0.25,0.25,0.25 --units frac");
    REQUIRE(frac.exit_code == 0);
    CHECK(table_lines(frac.out) == rows);
}

TEST_CASE("inequality reports a bent five-star faithfully") {
    const CommandResult res =
        run_cli("inequality -N 5 --angles 0.9,1.1,1.3,1.5,1.4831853071795862");
    REQUIRE(res.exit_code == 0);
    const auto rows = table_lines(res.out);
    REQUIRE(rows.size() == 5);
    double max_slack = -1.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto cells = csv_cells(rows[i]);
        const double lhs = std::stod(cells[1]);
        const double rhs = std::stod(cells[2]);
        const double slack = std::stod(cells[3]);
        CHECK(slack == Approx(rhs - lhs).margin(1e-12));
        max_slack = std::max(max_slack, slack);
    }
    CHECK(max_slack == Approx(0.47182001001737106).margin(1e-9));
}

TEST_CASE("scan output is byte deterministic for a fixed seed") {
    const std::string args =
        "scan -N 3 --samples 2 --seed 5 --panels 4 --order 4 --format csv";
    const CommandResult first = run_cli(args);
    const CommandResult second = run_cli(args);
    REQUIRE(first.exit_code == 0);
    CHECK(first.out == second.out);
    CHECK_THAT(first.out, ContainsSubstring("# seed = 5"));

    const auto rows = table_lines(first.out);
    REQUIRE(rows.size() == 4);  // header + reference + 2 samples
    CHECK(rows[0] == "seed,phi_1,phi_2,phi_3,lambda1,is_best");
    const auto reference = csv_cells(rows[1]);
    CHECK(reference.front() == "0");
    CHECK(reference.back() == "1");  // the symmetric star wins
    CHECK(csv_cells(rows[2]).front() == "5");
    CHECK(csv_cells(rows[3]).front() == "6");
}

TEST_CASE("scan json counts violations and marks the reference row") {
    const CommandResult res =
        run_cli("scan -N 3 --samples 1 --seed 9 --panels 4 --order 4 --format json");
    REQUIRE(res.exit_code == 0);
    const json j = json::parse(res.out);
    CHECK(j["violations"] == 0);
    REQUIRE(j["rows"].size() == 2);
    CHECK(j["rows"][0]["symmetric_reference"] == true);
    CHECK(j["rows"][0]["is_best"] == true);
    CHECK(j["rows"][1]["symmetric_reference"] == false);
    CHECK(j["rows"][1]["lambda1"].get<double>() <
          j["symmetric_lambda1"].get<double>());
}

TEST_CASE("seed comes from the environment unless a flag overrides it") {
    const std::string args =
        "scan -N 3 --samples 1 --panels 4 --order 4 --format csv";
    const CommandResult env_seed = run_cli(args, "STAR_SPECTRA_SEED=777");
    REQUIRE(env_seed.exit_code == 0);
    CHECK_THAT(env_seed.out, ContainsSubstring("# seed = 777"));
    const auto rows = table_lines(env_seed.out);
    REQUIRE(rows.size() == 3);
    CHECK(csv_cells(rows[2]).front() == "777");

    const CommandResult flag_wins = run_cli(args + " --seed 42", "STAR_SPECTRA_SEED=777");
    REQUIRE(flag_wins.exit_code == 0);
    CHECK_THAT(flag_wins.out, ContainsSubstring("# seed = 42"));
}

TEST_CASE("config file supplies values and flags override them") {
    const fs::path ini = scratch_file("run_ini");
    {
        std::ofstream f(ini);
        f << "# base configuration\n"
          << "num-edges = 3\n"
          << "symmetric = true\n"
          << "alpha = 5\n"
          << "panels = 4\n"
          << "order = 4\n";
    }
    const CommandResult from_file = run_cli("solve --config \"" + ini.string() + "\"");
    REQUIRE(from_file.exit_code == 0);
    const json j = json::parse(from_file.out);
    CHECK(j["config"]["panels"] == "4");
    CHECK(j["config"]["symmetric"] == "true");
    CHECK(j["config"]["alpha"] == "5");

    const CommandResult overridden =
        run_cli("solve --config \"" + ini.string() + "\" --alpha 2");
    REQUIRE(overridden.exit_code == 0);
    const json j2 = json::parse(overridden.out);
    CHECK(j2["config"]["alpha"] == "2");
    CHECK(j2["lambda1"].get<double>() > j["lambda1"].get<double>());
}

TEST_CASE("malformed config files name the offending field") {
    const fs::path bogus = scratch_file("bogus_ini");
    {
        std::ofstream f(bogus);
        f << "num-edges = 3\nbogus = 1\n";
    }
    const CommandResult unknown = run_cli("solve --config \"" + bogus.string() + "\"");
    CHECK(unknown.exit_code == 1);
    CHECK_THAT(unknown.err, ContainsSubstring("bogus"));

    const fs::path small = scratch_file("small_ini");
    {
        std::ofstream f(small);
        f << "num-edges = 1\n";
    }
    const CommandResult bad_n = run_cli("solve --config \"" + small.string() + "\"");
    CHECK(bad_n.exit_code == 1);
    CHECK_THAT(bad_n.err, ContainsSubstring("num-edges"));

    const CommandResult missing = run_cli("solve --config /nonexistent/file.ini");
    CHECK(missing.exit_code == 1);
    CHECK_THAT(missing.err, ContainsSubstring("cannot open"));
}

TEST_CASE("limit csv carries the extrapolation header") {
    const CommandResult res = run_cli(
        "limit -N 2 --angles 0.5,0.5 --units frac --alpha 2 "
        "--lengths 2.5,5,10 --panels 6 --order 5");
    REQUIRE(res.exit_code == 0);
    CHECK_THAT(res.out, ContainsSubstring("# limit_estimate = "));
    CHECK_THAT(res.out, ContainsSubstring("# threshold = -1"));
    CHECK_THAT(res.out, ContainsSubstring("# below_threshold = "));
    const auto rows = table_lines(res.out);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == "L,lambda1");
    std::vector<double> lambdas;
    for (std::size_t i = 1; i < rows.size(); ++i)
        lambdas.push_back(std::stod(csv_cells(rows[i])[1]));
    CHECK(lambdas[1] < lambdas[0]);
    CHECK(lambdas[2] < lambdas[1]);
    CHECK(csv_cells(rows[1])[0] == "2.5");
}

TEST_CASE("solve writes a positive eigenfunction trace") {
    const fs::path psi = scratch_file("psi_csv");
    const CommandResult res = run_cli(
        "solve --symmetric -N 2 --alpha 2 --panels 4 --order 4 --psi \"" +
        psi.string() + "\" -o \"" + scratch_file("solve_json").string() + "\"");
    REQUIRE(res.exit_code == 0);
    const auto rows = table_lines(slurp(psi));
    REQUIRE(rows.size() == 33);  // header + 2 edges x 16 points
    CHECK(rows[0] == "edge,s,value");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto cells = csv_cells(rows[i]);
        REQUIRE(cells.size() == 3);
        const double s = std::stod(cells[1]);
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
        CHECK(std::stod(cells[2]) > 0.0);
    }
}

TEST_CASE("converge kappa study shows a decreasing coupling curve") {
    const CommandResult res =
        run_cli("converge --study kappa -N 3 --symmetric --points 5 --panels 4 --order 4");
    REQUIRE(res.exit_code == 0);
    const auto rows = table_lines(res.out);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0] == "kappa,bs_value");
    std::vector<double> values;
    for (std::size_t i = 1; i < rows.size(); ++i)
        values.push_back(std::stod(csv_cells(rows[i])[1]));
    for (std::size_t i = 1; i < values.size(); ++i) CHECK(values[i] < values[i - 1]);
}

TEST_CASE("converge mesh study shrinks the eigenvalue increments") {
    const CommandResult res = run_cli(
        "converge --study mesh -N 3 --symmetric --steps 3 --panels 2 --order 4");
    REQUIRE(res.exit_code == 0);
    const auto rows = table_lines(res.out);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == "panels,lambda1,delta");
    CHECK(csv_cells(rows[1])[0] == "2");
    CHECK(csv_cells(rows[2])[0] == "4");
    CHECK(csv_cells(rows[3])[0] == "8");
    const double d1 = std::abs(std::stod(csv_cells(rows[2])[2]));
    const double d2 = std::abs(std::stod(csv_cells(rows[3])[2]));
    CHECK(d2 < d1);
}

TEST_CASE("optimize straightens a bent two-edge star and logs the trace") {
    const fs::path trace = scratch_file("trace_csv");
    const CommandResult res = run_cli(
        "optimize -N 2 --starts 1 --panels 4 --order 4 "
        "--initial 2.0,4.283185307179586 -o \"" + trace.string() + "\"");
    REQUIRE(res.exit_code == 0);
    const json j = json::parse(res.out);
    CHECK(j["converged"] == true);
    CHECK(j["distance_to_symmetric"].get<double>() < 1e-3);
    const double pi_value = 3.14159265358979312;
    CHECK(j["best"]["phi"][0].get<double>() == Approx(pi_value).margin(1e-3));
    CHECK(j["best"]["phi"][1].get<double>() == Approx(pi_value).margin(1e-3));

    const auto rows = table_lines(slurp(trace));
    REQUIRE(rows.size() >= 2);
    CHECK(rows[0] == "seed,phi_1,phi_2,lambda1,is_best");
    const double best = j["best"]["lambda1"].get<double>();
    int best_marks = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto cells = csv_cells(rows[i]);
        REQUIRE(cells.size() == 5);
        CHECK(std::stod(cells[3]) <= best + 1e-12);
        if (cells[4] == "1") ++best_marks;
    }
    CHECK(best_marks >= 1);
    CHECK(static_cast<int>(rows.size()) - 1 == j["evaluations"].get<int>());
}

TEST_CASE("validate passes its health checks") {
    const CommandResult res = run_cli("validate");
    REQUIRE(res.exit_code == 0);
    CHECK_THAT(res.out, ContainsSubstring("eigenfunction positivity"));
    CHECK_THAT(res.out, ContainsSubstring("coupling monotonicity"));
    CHECK_THAT(res.out, ContainsSubstring("chord inequality sweep"));
    CHECK_THAT(res.out, ContainsSubstring("discretization cross-check"));
    CHECK_THAT(res.out, ContainsSubstring("all checks passed"));
    CHECK(res.out.find("[fail]") == std::string::npos);
}

int main(int argc, char** argv) {
    if (argc > 1 && argv[1][0] != '-') {
        cli_binary_path() = argv[1];
        for (int i = 1; i + 1 < argc; ++i) argv[i] = argv[i + 1];
        --argc;
    }
    return Catch::Session().run(argc, argv);
}
