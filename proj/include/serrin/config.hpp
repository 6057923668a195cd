#pragma once

#include "serrin/annulus.hpp"
#include "serrin/problem.hpp"
#include "serrin/radial.hpp"
#include "serrin/verify.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace serrin {

struct RadialOptions {
    double r0 = 1.0;
    double rmax = 10.0;
    int npts = 201;
    Spacing spacing = Spacing::Uniform;
    bool allow_k_convex = false;
};

/// Standalone transform: either a CSV of samples (x, y, z, value) on the source shell grid, or,
/// without an input file, the radial primal of the radial section.
struct LegendreOptions {
    std::string input;
    double source_r_in = 1.0;
    double source_r_out = 2.0;
    int source_n_r = 41;
    double target_r_in = 1.0;
    double target_r_out = 1.5;
    int target_n_r = 41;
    int n_theta = 8;
    int n_phi = 16;
    double target_value = 0.0;  ///< quotient target for the residual report; 0 means 1/C(3,k)
};

struct VerifyTolerances {
    double free_boundary_u = 1e-3;
    double free_boundary_grad = 1e-2;
    double sandwich = 1e-6;
    IdentityTolerances identities;
};

struct RunConfig {
    int d = 3;
    int k = 2;
    /// Exactly one of the two is set; an empty pair means the identity.
    std::vector<double> A_eigenvalues;
    std::vector<std::vector<double>> A_dense;
    std::vector<double> b;
    double c = -0.5;
    std::vector<double> R = {8.0};
    GridControls grid;
    SolverControls solver;
    VerifyTolerances verify;
    RadialOptions radial;
    LegendreOptions legendre;
    std::string output_dir = "serrin_out";
    bool checkpoint_steps = false;  ///< dump every accepted t-step, not only the final field

    SymMatrix A() const;
    ProblemSpec problem() const;
    nlohmann::json to_json() const;
};

/// Accepts the JSON object layout of RunConfig::to_json; unknown keys are errors.
RunConfig config_from_json(const nlohmann::json& j);
/// .toml files go through parse_flat_toml, everything else is read as JSON.
RunConfig load_config(const std::filesystem::path& path);

/// TOML subset: [table] and [table.sub] headers, key = value with strings, numbers, booleans and
/// (nested) arrays, # comments. Throws FormatError with the line number.
nlohmann::json parse_flat_toml(const std::string& text);

/// Shape and range checks; with need_admissible also sigma_k(lambda(A)) = C(d,k) to 1e-8.
/// Throws DomainError or AdmissibilityError with the offending key.
void validate(const RunConfig& cfg, bool need_admissible);

}  // namespace serrin
