#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "dwrlab/config.hpp"
#include "dwrlab/io.hpp"
#include "dwrlab/study.hpp"
#include "dwrlab/verify.hpp"

namespace fs = std::filesystem;
using namespace dwrlab;

namespace {

int run_cli(const std::vector<std::string>& args);

std::string spacetime_text(const SpaceTimeSolution& traj, int n_dofs) {
    std::ostringstream os;
    os << "spacetime v1 " << n_dofs << " " << traj.n_steps() << " " << format_real(traj.dt)
       << "\n";
    for (double v : traj.initial) os << format_real(v) << "\n";
    for (const Vector& u : traj.states)
        for (double v : u) os << format_real(v) << "\n";
    return os.str();
}

void echo_config(const Config& cfg, const fs::path& out) {
    write_text_file(out / "effective.cfg", cfg.echo());
    for (const std::string& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_solve(const Config& cfg, const fs::path& out) {
    const DiscreteSpace space = cfg.make_space();
    std::ostringstream report;
    if (!is_unsteady(cfg.problem.kind)) {
        const Vector u = solve_primal(space, cfg.problem);
        write_text_file(out / "state.txt", write_state(u));
        report << "J " << format_real(evaluate_output(space, cfg.problem, cfg.output, u))
               << "\n";
    } else {
        const SpaceTimeSolution traj = time_march(space, cfg.problem);
        write_text_file(out / "trajectory.txt", spacetime_text(traj, space.n_dofs()));
        report << "J "
               << format_real(evaluate_unsteady_output(space, cfg.problem, cfg.output, traj))
               << "\n";
    }
    write_text_file(out / "output.txt", report.str());
    return 0;
}

int cmd_adjoint(const Config& cfg, const fs::path& out) {
    const DiscreteSpace space = cfg.make_space();
    std::ostringstream report;
    if (!is_unsteady(cfg.problem.kind)) {
        const Vector u = solve_primal(space, cfg.problem);
        const AdjointVector adj = solve_steady_adjoint(space, cfg.problem, cfg.output, u);
        write_text_file(out / "adjoint.txt", write_state(adj.coefficients));
        const double j = evaluate_output(space, cfg.problem, cfg.output, u);
        const Vector f = load_vector(space, cfg.problem);
        report << "J " << format_real(j) << "\n";
        report << "J_dual " << format_real(dot(adj.coefficients, f)) << "\n";
    } else {
        const SpaceTimeSolution traj = time_march(space, cfg.problem);
        const SpaceTimeAdjoint adj = solve_unsteady_adjoint(space, cfg.problem, cfg.output, traj);
        write_text_file(out / "adjoint.txt", write_spacetime_adjoint(adj, space.n_dofs()));
        const double j = evaluate_unsteady_output(space, cfg.problem, cfg.output, traj);
        const SparseMatrix mass = mass_matrix(space);
        double jd = 0.0;
        for (int m = 1; m <= traj.n_steps(); ++m) {
            Vector f = load_vector(space, cfg.problem, m * traj.dt);
            if (m == 1) {
                const Vector mi = mass.matvec(traj.initial);
                axpy(1.0 / traj.dt, mi, f);
            }
            jd += dot(adj.at(m), f);
        }
        report << "J " << format_real(j) << "\n";
        report << "J_dual " << format_real(jd) << "\n";
    }
    write_text_file(out / "output.txt", report.str());
    return 0;
}

int cmd_estimate(const Config& cfg, const fs::path& out) {
    const DiscreteSpace space = cfg.make_space();
    ErrorReport report;
    if (!is_unsteady(cfg.problem.kind)) {
        const Vector u = solve_primal(space, cfg.problem);
        FinePairOptions opts;
        opts.fine_mode = cfg.fine_mode;
        opts.adjoint_mode = cfg.adjoint_mode;
        opts.smoothing_sweeps = cfg.smoothing_sweeps;
        const FinePair pair = build_fine_pair(space, cfg.problem, cfg.output, u, opts);
        report = primal_estimate(pair, cfg.problem);
        const double truth = fine_truth(pair, cfg.problem, cfg.output);
        if (std::abs(truth) > 1e-14) report.effectivity = effectivity(report, truth);
    } else {
        const SpaceTimeSolution traj = time_march(space, cfg.problem);
        UnsteadyEstimateOptions opts;
        opts.fine_mode = cfg.fine_mode;
        const UnsteadyFineResult result =
            unsteady_estimate(space, cfg.problem, cfg.output, traj, opts);
        report = result.report;
        const double truth =
            unsteady_fine_truth(space, cfg.problem, cfg.output, traj, cfg.fine_mode);
        if (std::abs(truth) > 1e-14) report.effectivity = effectivity(report, truth);
    }
    write_text_file(out / "error_report.csv", write_error_report_csv(report));
    return 0;
}

int cmd_adapt(const Config& cfg, const fs::path& out) {
    std::optional<double> truth;
    try {
        truth = analytic_output(cfg.problem, cfg.output);
    } catch (const NotAvailable&) {
    }
    if (!is_unsteady(cfg.problem.kind)) {
        SteadyAdaptOptions opts;
        opts.mode = cfg.adapt_mode;
        opts.refine_fraction = cfg.refine_fraction;
        opts.coarsen_fraction = cfg.coarsen_fraction;
        opts.tolerance = cfg.tolerance;
        opts.max_iterations = cfg.max_iterations;
        opts.dof_cap = cfg.dof_cap;
        opts.fine.fine_mode = cfg.fine_mode;
        opts.fine.adjoint_mode = cfg.adjoint_mode;
        opts.fine.smoothing_sweeps = cfg.smoothing_sweeps;
        opts.residual_indicator = cfg.residual_indicator;
        opts.true_output = truth;
        opts.error_on_max_iterations = false;
        const AdaptiveHistory history =
            adapt_loop_steady(cfg.make_space(), cfg.problem, cfg.output, opts);
        write_text_file(out / "history.csv", write_history_csv(history));
        for (std::size_t i = 0; i < history.meshes.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "mesh_%04zu.txt", i);
            write_text_file(out / name, write_mesh(history.meshes[i]));
        }
    } else {
        UnsteadyAdaptOptions opts;
        opts.spatial_mode = cfg.adapt_mode;
        opts.refine_fraction = cfg.refine_fraction;
        opts.coarsen_fraction = cfg.coarsen_fraction;
        opts.tolerance = cfg.tolerance;
        opts.max_iterations = cfg.max_iterations;
        opts.dof_cap = cfg.dof_cap;
        opts.true_output = truth;
        opts.error_on_max_iterations = false;
        SlabDiscretization slabs;
        const DiscreteSpace space = cfg.make_space();
        const double dt = cfg.problem.final_time / cfg.problem.num_steps;
        for (int m = 0; m < cfg.problem.num_steps; ++m) {
            slabs.spaces.push_back(space);
            slabs.dts.push_back(dt);
        }
        const AdaptiveHistory history =
            adapt_loop_unsteady(slabs, cfg.problem, cfg.output, opts);
        write_text_file(out / "history.csv", write_history_csv(history));
        // final per-slab meshes (the spatial mesh may differ at every step)
        for (std::size_t m = 0; m < history.meshes.size(); ++m) {
            char name[32];
            std::snprintf(name, sizeof(name), "slab_mesh_%04zu.txt", m + 1);
            write_text_file(out / name, write_mesh(history.meshes[m]));
        }
    }
    return 0;
}

int cmd_study(const Config& cfg, const fs::path& out) {
    const StudyResult result = run_study(cfg);
    write_text_file(out / "study.csv", write_study_csv(result));
    return 0;
}

int cmd_verify(const fs::path& out, bool have_out) {
    unsigned long seed = 20240817ul;
    if (const char* env = std::getenv("DWRLAB_SEED")) seed = std::strtoul(env, nullptr, 10);
    std::string mutate;
    if (const char* env = std::getenv("DWRLAB_VERIFY_MUTATE")) mutate = env;
    const VerifyReport report = run_verify(seed, mutate);
    std::cout << report.text();
    if (have_out) write_text_file(out / "verify.txt", report.text());
    return report.all_pass() ? 0 : 3;
}

std::vector<std::string> split_args(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> args;
    std::string tok;
    while (is >> tok) args.push_back(tok);
    return args;
}

struct Expectation {
    std::string file;
    int line = 0;
    int field = 0;
    double value = 0.0;
    double tol = 0.0;
};

std::vector<std::string> fields_of(const std::string& line) {
    std::string normalized = line;
    std::replace(normalized.begin(), normalized.end(), ',', ' ');
    return split_args(normalized);
}

int cmd_docsbook(const fs::path& dir, bool update) {
    if (!fs::is_directory(dir))
        throw CaseFailure("docsbook: directory not found: " + dir.string());
    std::vector<fs::path> cases;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_directory()) cases.push_back(entry.path());
    std::sort(cases.begin(), cases.end());
    int drifted = 0;
    for (const fs::path& case_dir : cases) {
        const std::string id = case_dir.filename().string();
        const fs::path run_file = case_dir / "run.txt";
        const fs::path expect_file = case_dir / "expect.txt";
        if (!fs::exists(run_file) || !fs::exists(expect_file) ||
            !fs::exists(case_dir / "case.cfg"))
            throw CaseFailure("docsbook case '" + id + "': missing case.cfg/run.txt/expect.txt");

        // run the recorded command with the case directory as working root
        std::vector<std::string> args = split_args(read_text_file(run_file));
        for (std::string& a : args) {
            if (a == "case.cfg") a = (case_dir / "case.cfg").string();
            if (a == "out") a = (case_dir / "out").string();
        }
        const int rc = run_cli(args);
        if (rc != 0)
            throw CaseFailure("docsbook case '" + id + "': command failed with code " +
                              std::to_string(rc));

        // compare or update expected fragments
        std::istringstream es(read_text_file(expect_file));
        std::string line;
        std::vector<Expectation> expectations;
        while (std::getline(es, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ls(line);
            Expectation e;
            if (!(ls >> e.file >> e.line >> e.field >> e.value >> e.tol))
                throw CaseFailure("docsbook case '" + id + "': bad expect line: " + line);
            expectations.push_back(e);
        }
        bool rewrite = false;
        int case_drift = 0;
        for (Expectation& e : expectations) {
            const fs::path target = case_dir / e.file;
            if (!fs::exists(target))
                throw CaseFailure("docsbook case '" + id + "': missing output " + e.file);
            std::istringstream fs_text(read_text_file(target));
            std::string row;
            for (int l = 0; l < e.line; ++l)
                if (!std::getline(fs_text, row))
                    throw CaseFailure("docsbook case '" + id + "': " + e.file +
                                      " has fewer than " + std::to_string(e.line) + " lines");
            const std::vector<std::string> cells = fields_of(row);
            if (e.field < 1 || e.field > static_cast<int>(cells.size()))
                throw CaseFailure("docsbook case '" + id + "': field out of range");
            const double actual = std::strtod(cells[e.field - 1].c_str(), nullptr);
            if (std::abs(actual - e.value) > e.tol) {
                ++drifted;
                ++case_drift;
                std::cout << "DRIFT " << id << " " << e.file << ":" << e.line << ":"
                          << e.field << " expected " << format_real(e.value) << " got "
                          << format_real(actual) << " tol " << format_real(e.tol) << "\n";
            }
            if (update && actual != e.value) {
                e.value = actual;
                rewrite = true;
            }
        }
        if (rewrite) {
            std::ostringstream os;
            for (const Expectation& e : expectations)
                os << e.file << " " << e.line << " " << e.field << " " << format_real(e.value)
                   << " " << format_real(e.tol) << "\n";
            write_text_file(expect_file, os.str());
        }
        std::cout << "CASE " << id << " " << (case_drift ? "DRIFT" : "OK") << "\n";
    }
    if (drifted && !update) {
        std::cout << "docsbook: " << drifted << " drifting expectation(s)\n";
        return 3;
    }
    return 0;
}

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"adjoint-based output error estimation and mesh adaptation on 1D model problems"};
    app.require_subcommand(1);

    std::string config_path, out_dir, doc_dir = "docsbook";
    bool doc_update = false;

    auto add_run_command = [&](const std::string& name, const std::string& desc) {
        CLI::App* cmd = app.add_subcommand(name, desc);
        cmd->add_option("--config", config_path, "config file")->required();
        cmd->add_option("--out", out_dir, "output directory (created if absent)")->required();
        return cmd;
    };
    CLI::App* solve = add_run_command("solve", "solve the primal problem and write state + J");
    CLI::App* adjoint = add_run_command("adjoint", "solve the adjoint and write it + dual-form J");
    CLI::App* estimate = add_run_command("estimate", "dual-weighted-residual error report");
    CLI::App* adapt = add_run_command("adapt", "run the adaptive loop; history + mesh snapshots");
    CLI::App* study = add_run_command("study", "convergence study over a mesh sequence");
    CLI::App* verify = app.add_subcommand("verify", "run the oracle cross-check suite");
    verify->add_option("--out", out_dir, "optional directory for verify.txt");
    CLI::App* docsbook =
        app.add_subcommand("docsbook", "run the executable examples and check expectations");
    docsbook->add_option("--dir", doc_dir, "examples directory");
    docsbook->add_flag("--update", doc_update, "rewrite expected fragments on drift");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        std::cerr << (e.get_exit_code() == 0 ? "" : "error: ") << e.what() << "\n";
        if (e.get_exit_code() == 0) {
            std::cout << app.help();
            return 0;
        }
        std::cerr << app.help();
        return 2;
    }

    try {
        if (*verify) return cmd_verify(out_dir, !out_dir.empty());
        if (*docsbook) return cmd_docsbook(doc_dir, doc_update);
        const Config cfg = load_config(config_path);
        const fs::path out(out_dir);
        fs::create_directories(out);
        echo_config(cfg, out);
        if (*solve) return cmd_solve(cfg, out);
        if (*adjoint) return cmd_adjoint(cfg, out);
        if (*estimate) return cmd_estimate(cfg, out);
        if (*adapt) return cmd_adapt(cfg, out);
        if (*study) return cmd_study(cfg, out);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: line " << e.line() << ": " << e.what() << "\n";
        return 2;
    } catch (const SyntaxError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args);
}
