#include "dwrlab/config.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "dwrlab/io.hpp"

namespace dwrlab {

namespace {

struct RawEntry {
    std::string value;
    int line = 0;
    bool used = false;
};

using Section = std::map<std::string, RawEntry>;

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::map<std::string, Section> parse_sections(const std::string& text) {
    static const std::vector<std::string> known = {"problem", "output", "discretization",
                                                   "adaptation", "study"};
    std::map<std::string, Section> sections;
    std::set<std::string> seen_headers;
    std::istringstream is(text);
    std::string line;
    std::string current;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError("unterminated section header", lineno);
            current = trim(line.substr(1, line.size() - 2));
            bool ok = false;
            for (const std::string& k : known) ok = ok || k == current;
            if (!ok) throw ValidationError(current, "unknown section");
            if (!seen_headers.insert(current).second)
                throw ValidationError(current, "duplicate section");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected key = value", lineno);
        if (current.empty())
            throw ParseError("key outside of a section", lineno);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", lineno);
        if (sections[current].count(key))
            throw ValidationError(key, "duplicate key");
        sections[current][key] = RawEntry{value, lineno, false};
    }
    return sections;
}

class Reader {
public:
    explicit Reader(std::map<std::string, Section>& sections) : sections_(sections) {}

    bool has(const std::string& section, const std::string& key) {
        auto s = sections_.find(section);
        return s != sections_.end() && s->second.count(key) > 0;
    }

    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) {
        auto s = sections_.find(section);
        if (s == sections_.end()) return fallback;
        auto it = s->second.find(key);
        if (it == s->second.end()) return fallback;
        it->second.used = true;
        return it->second.value;
    }

    double get_real(const std::string& section, const std::string& key, double fallback) {
        const std::string v = get(section, key, "");
        if (v.empty() && !has(section, key)) return fallback;
        try {
            std::size_t used = 0;
            const double d = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw ValidationError(key, "not a real number: '" + v + "'");
        }
    }

    long get_int(const std::string& section, const std::string& key, long fallback) {
        const std::string v = get(section, key, "");
        if (v.empty() && !has(section, key)) return fallback;
        try {
            std::size_t used = 0;
            const long d = std::stol(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw ValidationError(key, "not an integer: '" + v + "'");
        }
    }

    bool get_bool(const std::string& section, const std::string& key, bool fallback) {
        const std::string v = get(section, key, "");
        if (v.empty() && !has(section, key)) return fallback;
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw ValidationError(key, "expected true/false");
    }

    void reject_unused() const {
        for (const auto& [sname, section] : sections_)
            for (const auto& [key, entry] : section)
                if (!entry.used)
                    throw ValidationError(sname + "." + key, "unknown key");
    }

private:
    std::map<std::string, Section>& sections_;
};

ScalarField compile(const std::string& source) {
    return parse_expression(source).evaluator();
}

} // namespace

Config parse_config(const std::string& text) {
    auto sections = parse_sections(text);
    Reader r(sections);
    Config cfg;

    const std::string variant = r.get("problem", "variant", "");
    if (variant == "advection")
        cfg.problem.kind = ProblemKind::SteadyAdvection;
    else if (variant == "diffusion")
        cfg.problem.kind = ProblemKind::SteadyDiffusion;
    else if (variant == "burgers")
        cfg.problem.kind = ProblemKind::SteadyBurgers;
    else if (variant == "unsteady_advection_diffusion")
        cfg.problem.kind = ProblemKind::UnsteadyAdvectionDiffusion;
    else
        throw ValidationError("variant",
                              variant.empty() ? "required" : "unknown variant '" + variant + "'");

    cfg.problem.x_left = r.get_real("problem", "x_left", 0.0);
    cfg.problem.x_right = r.get_real("problem", "x_right", 1.0);
    cfg.problem.advection_speed = r.get_real("problem", "a", 0.0);
    cfg.problem.diffusivity = r.get_real("problem", "nu", 0.0);
    cfg.problem.dirichlet_left = r.get_real("problem", "u_L", 0.0);
    cfg.problem.neumann_right = r.get_real("problem", "u_xR", 0.0);
    cfg.f_source = r.get("problem", "f", "0");
    try {
        cfg.problem.source = compile(cfg.f_source);
    } catch (const SyntaxError& e) {
        throw ValidationError("f", e.what());
    }
    if (is_unsteady(cfg.problem.kind)) {
        cfg.problem.final_time = r.get_real("problem", "T", 0.0);
        cfg.problem.num_steps = static_cast<int>(r.get_int("problem", "N_t", 0));
        cfg.u0_source = r.get("problem", "u0", "0");
        try {
            cfg.problem.initial_condition = compile(cfg.u0_source);
        } catch (const SyntaxError& e) {
            throw ValidationError("u0", e.what());
        }
    }

    cfg.n_elem = static_cast<int>(r.get_int("discretization", "n_elem", 8));
    cfg.order = static_cast<int>(r.get_int("discretization", "p", 1));
    if (cfg.n_elem < 1) throw ValidationError("n_elem", "must be >= 1");
    if (cfg.order < 0 || cfg.order > kMaxOrder)
        throw ValidationError("p", "must be in [0, 10]");
    const std::string fine = r.get("discretization", "fine_space", "p_enrich");
    if (fine == "p_enrich")
        cfg.fine_mode = FineSpaceMode::PEnrich;
    else if (fine == "h_refine")
        cfg.fine_mode = FineSpaceMode::HRefine;
    else
        throw ValidationError("fine_space", "expected p_enrich or h_refine");
    const std::string amode = r.get("discretization", "adjoint_mode", "exact");
    if (amode == "exact") {
        cfg.adjoint_mode = AdjointSolveMode::Exact;
    } else if (amode.rfind("smoothed:", 0) == 0) {
        cfg.adjoint_mode = AdjointSolveMode::Smoothed;
        try {
            cfg.smoothing_sweeps = std::stoi(amode.substr(9));
        } catch (const std::exception&) {
            throw ValidationError("adjoint_mode", "expected smoothed:<sweeps>");
        }
        if (cfg.smoothing_sweeps < 1)
            throw ValidationError("adjoint_mode", "sweep count must be >= 1");
    } else {
        throw ValidationError("adjoint_mode", "expected exact or smoothed:<sweeps>");
    }

    // output section
    cfg.g_source = r.get("output", "g", "");
    if (!cfg.g_source.empty()) {
        try {
            cfg.output.interior_weight = compile(cfg.g_source);
        } catch (const SyntaxError& e) {
            throw ValidationError("g", e.what());
        }
    }
    if (r.has("output", "x_p"))
        cfg.output.point_location = r.get_real("output", "x_p", 0.0);
    cfg.output.right_boundary_weight = r.get_real("output", "g_R", 0.0);
    cfg.output.left_derivative_weight = r.get_real("output", "g_L", 0.0);
    cfg.output.quadratic_flux = r.get_bool("output", "flux", false);
    if (is_unsteady(cfg.problem.kind)) {
        cfg.output.time_begin = r.get_real("output", "t_a", 0.0);
        cfg.output.time_end = r.get_real("output", "t_b", cfg.problem.final_time);
    }

    cfg.adapt_mode = AdaptMode::H;
    const std::string mode = r.get("adaptation", "mode", "h");
    if (mode == "h")
        cfg.adapt_mode = AdaptMode::H;
    else if (mode == "p")
        cfg.adapt_mode = AdaptMode::P;
    else
        throw ValidationError("mode", "expected h or p");
    const bool unsteady = is_unsteady(cfg.problem.kind);
    cfg.refine_fraction =
        r.get_real("adaptation", "refine_fraction", unsteady ? 0.35 : 0.2);
    cfg.coarsen_fraction =
        r.get_real("adaptation", "coarsen_fraction", unsteady ? 0.05 : 0.0);
    cfg.tolerance = r.get_real("adaptation", "tol", 1e-8);
    cfg.max_iterations = static_cast<int>(r.get_int("adaptation", "max_iter", 12));
    cfg.dof_cap = r.get_int("adaptation", "dof_cap", 200000);
    const std::string indicator = r.get("adaptation", "indicator", "adjoint");
    if (indicator == "adjoint")
        cfg.residual_indicator = false;
    else if (indicator == "residual")
        cfg.residual_indicator = true;
    else
        throw ValidationError("indicator", "expected adjoint or residual");
    if (cfg.refine_fraction < 0.0 || cfg.coarsen_fraction < 0.0 ||
        cfg.refine_fraction + cfg.coarsen_fraction > 1.0)
        throw ValidationError("refine_fraction", "fractions must be >= 0 and sum to <= 1");

    const std::string meshes = r.get("study", "meshes", "");
    if (!meshes.empty()) {
        std::istringstream ms(meshes);
        std::string tok;
        while (std::getline(ms, tok, ',')) {
            try {
                cfg.study_meshes.push_back(std::stoi(trim(tok)));
            } catch (const std::exception&) {
                throw ValidationError("meshes", "expected a comma-separated integer list");
            }
        }
    }
    const std::string forms = r.get("study", "forms", "primal");
    {
        cfg.study_forms.clear();
        std::istringstream fs(forms);
        std::string tok;
        while (std::getline(fs, tok, ',')) {
            tok = trim(tok);
            if (tok == "primal")
                cfg.study_forms.push_back(EstimateForm::Primal);
            else if (tok == "fe_orth")
                cfg.study_forms.push_back(EstimateForm::FeOrthogonalized);
            else if (tok == "dual")
                cfg.study_forms.push_back(EstimateForm::Dual);
            else if (tok == "third")
                cfg.study_forms.push_back(EstimateForm::ThirdOrder);
            else
                throw ValidationError("forms", "unknown estimate form '" + tok + "'");
        }
    }

    r.reject_unused();

    // semantic validation
    try {
        cfg.problem.validate();
    } catch (const Error& e) {
        throw ValidationError("problem", e.what());
    }

    // point outputs: keep x_p off element boundaries and strictly interior
    if (cfg.output.point_location) {
        const double span = cfg.problem.x_right - cfg.problem.x_left;
        double xp = *cfg.output.point_location;
        if (!(cfg.problem.x_left < xp && xp < cfg.problem.x_right))
            throw ValidationError("x_p", "must be strictly interior");
        const double h = span / cfg.n_elem;
        const double rel = (xp - cfg.problem.x_left) / h;
        if (std::abs(rel - std::round(rel)) < 1e-12 * cfg.n_elem) {
            xp -= 1e-9 * span;
            cfg.output.point_location = xp;
            cfg.warnings.push_back(
                "x_p coincides with an element boundary; shifted left by 1e-9 * span");
        }
        if (xp - cfg.problem.x_left < h || cfg.problem.x_right - xp < h)
            cfg.warnings.push_back("x_p lies within one element of the domain boundary");
    }

    try {
        output_compatibility_check(cfg.problem, cfg.output);
    } catch (const IncompatibleOutput& e) {
        throw ValidationError("output", e.what());
    }

    if (is_unsteady(cfg.problem.kind)) {
        const double dt = cfg.problem.final_time / cfg.problem.num_steps;
        auto aligned = [&](double t) {
            const double steps = t / dt;
            return std::abs(steps - std::round(steps)) < 1e-9;
        };
        if (!aligned(cfg.output.time_begin) || !aligned(cfg.output.time_end))
            throw ValidationError("t_a", "time window must align with step boundaries");
        if (cfg.output.time_begin == cfg.output.time_end &&
            cfg.output.time_end < dt - 1e-12)
            throw ValidationError("t_b", "instantaneous output must be at or after the first step");
    }
    return cfg;
}

Config load_config(const std::filesystem::path& path) {
    return parse_config(read_text_file(path));
}

DiscreteSpace Config::make_space() const {
    return DiscreteSpace(uniform_mesh(problem.x_left, problem.x_right, n_elem, order),
                         problem.kind);
}

std::string Config::echo() const {
    std::ostringstream os;
    os << "[problem]\n";
    os << "variant = " << to_string(problem.kind) << "\n";
    os << "x_left = " << format_real(problem.x_left) << "\n";
    os << "x_right = " << format_real(problem.x_right) << "\n";
    if (problem.has_advection()) os << "a = " << format_real(problem.advection_speed) << "\n";
    if (problem.has_diffusion()) os << "nu = " << format_real(problem.diffusivity) << "\n";
    os << "f = " << (f_source.empty() ? "0" : f_source) << "\n";
    os << "u_L = " << format_real(problem.dirichlet_left) << "\n";
    if (problem.has_diffusion())
        os << "u_xR = " << format_real(problem.neumann_right) << "\n";
    if (is_unsteady(problem.kind)) {
        os << "u0 = " << (u0_source.empty() ? "0" : u0_source) << "\n";
        os << "T = " << format_real(problem.final_time) << "\n";
        os << "N_t = " << problem.num_steps << "\n";
    }
    os << "\n[output]\n";
    if (!g_source.empty()) os << "g = " << g_source << "\n";
    if (output.point_location) os << "x_p = " << format_real(*output.point_location) << "\n";
    if (output.right_boundary_weight != 0.0)
        os << "g_R = " << format_real(output.right_boundary_weight) << "\n";
    if (output.left_derivative_weight != 0.0)
        os << "g_L = " << format_real(output.left_derivative_weight) << "\n";
    if (output.quadratic_flux) os << "flux = true\n";
    if (is_unsteady(problem.kind)) {
        os << "t_a = " << format_real(output.time_begin) << "\n";
        os << "t_b = " << format_real(output.time_end) << "\n";
    }
    os << "\n[discretization]\n";
    os << "n_elem = " << n_elem << "\n";
    os << "p = " << order << "\n";
    os << "fine_space = "
       << (fine_mode == FineSpaceMode::PEnrich ? "p_enrich" : "h_refine") << "\n";
    if (adjoint_mode == AdjointSolveMode::Exact)
        os << "adjoint_mode = exact\n";
    else
        os << "adjoint_mode = smoothed:" << smoothing_sweeps << "\n";
    os << "\n[adaptation]\n";
    os << "mode = " << (adapt_mode == AdaptMode::H ? "h" : "p") << "\n";
    os << "refine_fraction = " << format_real(refine_fraction) << "\n";
    os << "coarsen_fraction = " << format_real(coarsen_fraction) << "\n";
    os << "tol = " << format_real(tolerance) << "\n";
    os << "max_iter = " << max_iterations << "\n";
    os << "dof_cap = " << dof_cap << "\n";
    os << "indicator = " << (residual_indicator ? "residual" : "adjoint") << "\n";
    if (!study_meshes.empty()) {
        os << "\n[study]\n";
        os << "meshes = ";
        for (std::size_t i = 0; i < study_meshes.size(); ++i)
            os << (i ? "," : "") << study_meshes[i];
        os << "\n";
        os << "forms = ";
        for (std::size_t i = 0; i < study_forms.size(); ++i) {
            const EstimateForm f = study_forms[i];
            os << (i ? "," : "")
               << (f == EstimateForm::Primal            ? "primal"
                   : f == EstimateForm::FeOrthogonalized ? "fe_orth"
                   : f == EstimateForm::Dual             ? "dual"
                                                         : "third");
        }
        os << "\n";
    }
    return os.str();
}

} // namespace dwrlab
