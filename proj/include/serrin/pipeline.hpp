#pragma once

#include "serrin/annulus.hpp"
#include "serrin/config.hpp"
#include "serrin/verify.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>

namespace serrin::pipeline {

enum ExitCode : int { Pass = 0, Validation = 2, Solver = 3, Verification = 4 };

/// Verification output shared by `solve` and `verify`; a pure function of config and field so
/// that both commands write identical reports.
struct Report {
    nlohmann::json identities;
    nlohmann::json decay;
    bool pass = false;
    std::optional<FreeBoundary> boundary;  ///< shell path only
};

Report verify_shell(const RunConfig& cfg, const ReducedProblem& red, const AnnulusField& field);
/// A = I in any d >= 3; r are the shell radii, u the dual values on them.
Report verify_radial(const RunConfig& cfg, double c_reduced, std::span<const double> r,
                           std::span<const double> u);

int run_constants(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);
int run_radial(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);
int run_solve(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);
int run_verify(const RunConfig& cfg, const std::filesystem::path& checkpoint,
               const std::filesystem::path& out, std::ostream& log);
int run_legendre(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);

/// Runs body, mapping library exceptions to exit codes and printing their message to err.
int guarded(const std::function<int()>& body, std::ostream& err);

}  // namespace serrin::pipeline
