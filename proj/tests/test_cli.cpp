#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dwrlab/config.hpp"
#include "dwrlab/io.hpp"
#include "dwrlab/study.hpp"
#include "dwrlab/verify.hpp"

using namespace dwrlab;
namespace fs = std::filesystem;

namespace {

const std::string kMinimalAdvection = R"(# minimal case
[problem]
variant = advection
a = 1
f = 1

[output]
g = 1
)";

fs::path tmp_dir(const std::string& name) {
    const fs::path dir = fs::path(DWRLAB_TEST_TMP) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run(const std::string& args, std::string* output = nullptr) {
    const fs::path out = fs::path(DWRLAB_TEST_TMP) / "cmd_output.txt";
    fs::create_directories(out.parent_path());
    const std::string cmd =
        std::string(DWRLAB_BIN) + " " + args + " > " + out.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    if (output) *output = read_text_file(out);
    return WEXITSTATUS(rc);
}

} // namespace

TEST_CASE("config: defaults applied for a minimal case file") {
    const Config cfg = parse_config(kMinimalAdvection);
    CHECK(cfg.n_elem == 8);
    CHECK(cfg.order == 1);
    CHECK(cfg.problem.kind == ProblemKind::SteadyAdvection);
    CHECK(cfg.refine_fraction == 0.2);
    CHECK(cfg.fine_mode == FineSpaceMode::PEnrich);
}

TEST_CASE("config: unknown keys and sections rejected") {
    CHECK_THROWS_AS(parse_config(kMinimalAdvection + "\n[problem]\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("[problem]\nvariant = advection\na = 1\nf = 1\nfoo = 1\n"
                                 "\n[output]\ng = 1\n"),
                    ValidationError);
    CHECK_THROWS_AS(parse_config("[nope]\nx = 1\n"), ValidationError);
}

TEST_CASE("config: compatibility violations become validation errors") {
    const std::string bad = R"([problem]
variant = advection
a = 1
f = 1

[output]
g_L = 1
)";
    CHECK_THROWS_AS(parse_config(bad), ValidationError);
}

TEST_CASE("config: x_p on an element boundary is shifted with a warning") {
    const std::string text = R"([problem]
variant = advection
a = 1
f = 1

[output]
x_p = 0.5

[discretization]
n_elem = 8
)";
    const Config cfg = parse_config(text);
    REQUIRE(cfg.output.point_location.has_value());
    CHECK(*cfg.output.point_location < 0.5);
    CHECK(!cfg.warnings.empty());
}

TEST_CASE("config: echo round-trips to an identical effective config") {
    const Config cfg = parse_config(kMinimalAdvection);
    const Config again = parse_config(cfg.echo());
    CHECK(again.echo() == cfg.echo());
}

TEST_CASE("config: unsteady window alignment enforced") {
    const std::string base = R"([problem]
variant = unsteady_advection_diffusion
a = 1
nu = 0.5
f = exp(-t)*x
u0 = x
T = 1
N_t = 10

[output]
g = 1
t_a = 0
)";
    CHECK_NOTHROW(parse_config(base + "t_b = 1\n"));
    CHECK_THROWS_AS(parse_config(base + "t_b = 0.55\n"), ValidationError);
}

TEST_CASE("cli: missing arguments produce usage and exit 2") {
    std::string output;
    CHECK(run("solve", &output) == 2);
    CHECK(output.find("--config") != std::string::npos);
}

TEST_CASE("cli: validation failures exit 2") {
    const fs::path dir = tmp_dir("bad_config");
    write_text_file(dir / "case.cfg", "[problem]\nvariant = advection\na = -1\nf = 1\n"
                                      "\n[output]\ng = 1\n");
    std::string output;
    CHECK(run("solve --config " + (dir / "case.cfg").string() + " --out " +
                  (dir / "out").string(),
              &output) == 2);
}

TEST_CASE("cli: estimate on a linear catalog case reports effectivity 1") {
    const fs::path dir = tmp_dir("estimate_linear");
    write_text_file(dir / "case.cfg", R"([problem]
variant = advection
a = 1
f = 3.1415926535897931*cos(3.1415926535897931*x)

[output]
x_p = 0.53
)");
    std::string output;
    REQUIRE(run("estimate --config " + (dir / "case.cfg").string() + " --out " +
                    (dir / "out").string(),
                &output) == 0);
    const std::string csv = read_text_file(dir / "out" / "error_report.csv");
    // footer: total,<est>,effectivity,<eta>
    const std::size_t pos = csv.rfind("total,");
    REQUIRE(pos != std::string::npos);
    std::istringstream footer(csv.substr(pos));
    std::string cell;
    std::getline(footer, cell, ','); // total
    std::getline(footer, cell, ','); // estimate value
    std::getline(footer, cell, ','); // "effectivity"
    std::getline(footer, cell);      // eta
    const double eta = std::strtod(cell.c_str(), nullptr);
    CHECK(std::abs(eta - 1.0) <= 1e-9);
}

TEST_CASE("cli: adapt then re-solving the last mesh reproduces the history J") {
    const fs::path dir = tmp_dir("adapt_replay");
    write_text_file(dir / "case.cfg", R"([problem]
variant = advection
a = 1
f = 3.1415926535897931*cos(3.1415926535897931*x)

[output]
g = 1

[adaptation]
max_iter = 3
tol = 1e-13
)");
    REQUIRE(run("adapt --config " + (dir / "case.cfg").string() + " --out " +
                (dir / "out").string()) == 0);
    // last history row
    std::istringstream history(read_text_file(dir / "out" / "history.csv"));
    std::string line, last;
    std::getline(history, line); // header
    while (std::getline(history, line))
        if (!line.empty()) last = line;
    std::istringstream row(last);
    std::string cell;
    std::getline(row, cell, ','); // iter
    const int last_iter = std::atoi(cell.c_str());
    std::getline(row, cell, ','); // dof
    std::getline(row, cell, ','); // J
    const double j_history = std::strtod(cell.c_str(), nullptr);

    char name[32];
    std::snprintf(name, sizeof(name), "mesh_%04d.txt", last_iter);
    const Mesh1D mesh = read_mesh(read_text_file(dir / "out" / name));
    const Config cfg = parse_config(read_text_file(dir / "case.cfg"));
    const DiscreteSpace space(mesh, cfg.problem.kind);
    const Vector u = solve_primal(space, cfg.problem);
    const double j = evaluate_output(space, cfg.problem, cfg.output, u);
    CHECK(std::abs(j - j_history) <= 1e-12 * std::max(1.0, std::abs(j)));
}

TEST_CASE("cli: verify passes on a fresh build and honors the mutation hook") {
    std::string output;
    CHECK(run("verify", &output) == 0);
    CHECK(output.find("FAIL") == std::string::npos);
    CHECK(output.find("CHECK transpose_identity") != std::string::npos);

    // lines have the form: CHECK <name> <measured> <tol> PASS|FAIL
    std::istringstream is(output);
    std::string line;
    while (std::getline(is, line)) {
        if (line.rfind("CHECK ", 0) != 0) continue;
        std::istringstream ls(line);
        std::string tag, name, measured, tol, status;
        ls >> tag >> name >> measured >> tol >> status;
        CHECK((status == "PASS" || status == "FAIL"));
    }

    const int rc = std::system((std::string("DWRLAB_VERIFY_MUTATE=adjoint_sign_flip ") +
                                DWRLAB_BIN + " verify > /dev/null 2>&1")
                                   .c_str());
    CHECK(WEXITSTATUS(rc) != 0);
}

TEST_CASE("cli: identical configs give bit-identical study output") {
    const fs::path dir = tmp_dir("study_determinism");
    write_text_file(dir / "case.cfg", R"([problem]
variant = advection
a = 1
f = 3.1415926535897931*cos(3.1415926535897931*x)

[output]
g = 1

[study]
meshes = 4,8,16
)");
    REQUIRE(run("study --config " + (dir / "case.cfg").string() + " --out " +
                (dir / "a").string()) == 0);
    REQUIRE(run("study --config " + (dir / "case.cfg").string() + " --out " +
                (dir / "b").string()) == 0);
    CHECK(read_text_file(dir / "a" / "study.csv") == read_text_file(dir / "b" / "study.csv"));
}

TEST_CASE("cli: echoed config reproduces identical outputs") {
    const fs::path dir = tmp_dir("echo_roundtrip");
    write_text_file(dir / "case.cfg", kMinimalAdvection);
    REQUIRE(run("estimate --config " + (dir / "case.cfg").string() + " --out " +
                (dir / "a").string()) == 0);
    REQUIRE(run("estimate --config " + (dir / "a" / "effective.cfg").string() + " --out " +
                (dir / "b").string()) == 0);
    CHECK(read_text_file(dir / "a" / "error_report.csv") ==
          read_text_file(dir / "b" / "error_report.csv"));
}

TEST_CASE("docsbook index: every topic maps to one case or verify check") {
    const fs::path dir = fs::path(DWRLAB_SOURCE_DIR) / "docsbook";
    REQUIRE(fs::is_directory(dir));
    std::istringstream index(read_text_file(dir / "index.txt"));
    std::string line;
    std::set<std::string> topics, referenced_cases;
    std::set<std::string> verify_names;
    for (const CheckResult& c : run_verify().checks) verify_names.insert(c.name);
    while (std::getline(index, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string topic, target;
        REQUIRE((ls >> topic >> target));
        CHECK(topics.insert(topic).second); // exactly one entry per topic
        if (target.rfind("verify:", 0) == 0) {
            CHECK(verify_names.count(target.substr(7)) == 1);
        } else {
            referenced_cases.insert(target);
            CHECK(fs::is_directory(dir / target));
            CHECK(fs::exists(dir / target / "case.cfg"));
            CHECK(fs::exists(dir / target / "run.txt"));
            CHECK(fs::exists(dir / target / "expect.txt"));
        }
    }
    CHECK(!topics.empty());
    // every case directory is indexed
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_directory()) continue;
        CHECK(referenced_cases.count(entry.path().filename().string()) == 1);
    }
}

namespace {

// strict reader: LF newlines only, comma-separated, C-locale numerics
void check_strict_csv(const std::string& text) {
    CHECK(text.find('\r') == std::string::npos);
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            if (cell.empty() || cell == "NA") continue;
            if (std::isdigit(static_cast<unsigned char>(cell[0])) || cell[0] == '-' ||
                cell[0] == '+' || cell[0] == '.') {
                char* end = nullptr;
                std::strtod(cell.c_str(), &end);
                CHECK(end == cell.c_str() + cell.size());
            }
        }
    }
}

} // namespace

TEST_CASE("cli: emitted CSVs satisfy the strict reader") {
    const fs::path dir = tmp_dir("strict_csv");
    write_text_file(dir / "steady.cfg", R"([problem]
variant = advection
a = 1
f = 3.1415926535897931*cos(3.1415926535897931*x)

[output]
x_p = 0.53

[study]
meshes = 4,8
)");
    write_text_file(dir / "unsteady.cfg", R"([problem]
variant = unsteady_advection_diffusion
a = 1
nu = 0.5
f = exp(-t)*x
u0 = x*(2-x)
T = 1
N_t = 4

[output]
g = 1
t_a = 0
t_b = 1

[discretization]
n_elem = 4
)");
    REQUIRE(run("study --config " + (dir / "steady.cfg").string() + " --out " +
                (dir / "s").string()) == 0);
    REQUIRE(run("estimate --config " + (dir / "steady.cfg").string() + " --out " +
                (dir / "e").string()) == 0);
    REQUIRE(run("adapt --config " + (dir / "steady.cfg").string() + " --out " +
                (dir / "a").string()) == 0);
    REQUIRE(run("estimate --config " + (dir / "unsteady.cfg").string() + " --out " +
                (dir / "u").string()) == 0);
    check_strict_csv(read_text_file(dir / "s" / "study.csv"));
    check_strict_csv(read_text_file(dir / "e" / "error_report.csv"));
    check_strict_csv(read_text_file(dir / "a" / "history.csv"));
    check_strict_csv(read_text_file(dir / "u" / "error_report.csv"));
}

TEST_CASE("cli: docsbook reports case failures for broken cases") {
    const fs::path dir = tmp_dir("docsbook_broken");
    fs::create_directories(dir / "incomplete-case");
    write_text_file(dir / "incomplete-case" / "case.cfg", "[problem]\nvariant = advection\n");
    // run.txt and expect.txt missing
    std::string output;
    CHECK(run("docsbook --dir " + dir.string(), &output) == 3);
    CHECK(output.find("incomplete-case") != std::string::npos);
}
