#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dwrlab/adapt.hpp"
#include "dwrlab/expression.hpp"

namespace dwrlab {

/// Parsed and validated run configuration. Function-valued fields keep
/// their expression source so the effective config can be echoed and
/// reloaded reproducibly.
struct Config {
    PrimalProblem problem;
    OutputFunctional output;
    std::string f_source;
    std::string g_source;
    std::string u0_source;

    int n_elem = 8;
    int order = 1;
    FineSpaceMode fine_mode = FineSpaceMode::PEnrich;
    AdjointSolveMode adjoint_mode = AdjointSolveMode::Exact;
    int smoothing_sweeps = 5;

    AdaptMode adapt_mode = AdaptMode::H;
    double refine_fraction = 0.2;
    double coarsen_fraction = 0.0;
    double tolerance = 1e-8;
    int max_iterations = 12;
    long dof_cap = 200000;
    bool residual_indicator = false;

    std::vector<int> study_meshes;
    std::vector<EstimateForm> study_forms = {EstimateForm::Primal};

    std::vector<std::string> warnings;

    DiscreteSpace make_space() const;
    /// Normalized effective config (defaults materialized, 17 digits).
    std::string echo() const;
};

Config load_config(const std::filesystem::path& path);
Config parse_config(const std::string& text);

} // namespace dwrlab
