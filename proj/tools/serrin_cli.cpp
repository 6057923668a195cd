#include "serrin/config.hpp"
#include "serrin/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace serrin;

int main(int argc, char** argv) {
    CLI::App app{"Exterior overdetermined k-Hessian problem: constants, radial profiles, annulus solves, verification"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string checkpoint;
    app.add_option("-c,--config", config_path, "JSON or TOML run configuration")->check(CLI::ExistingFile);
    app.add_option("-o,--out", out_dir, "output directory (default: output_dir from the config)");

    auto* constants = app.add_subcommand("constants", "threshold constants for (k, d, A, b)");
    auto* radial = app.add_subcommand("radial", "explicit radial primal profile");
    auto* solve = app.add_subcommand("solve", "continuation solve on spherical annuli, then verification");
    auto* verify = app.add_subcommand("verify", "re-run verification on a stored checkpoint");
    verify->add_option("checkpoint", checkpoint, "checkpoint written by solve")->required();
    auto* legendre = app.add_subcommand("legendre", "standalone Legendre transform of sampled data");
    for (auto* sub : {constants, radial, solve, verify, legendre}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : pipeline::Validation;
    }

    return pipeline::guarded(
        [&]() -> int {
            const RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
            const fs::path out = out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(out_dir);
            fs::create_directories(out);
            if (constants->parsed()) return pipeline::run_constants(cfg, out, std::cout);
            if (radial->parsed()) return pipeline::run_radial(cfg, out, std::cout);
            if (solve->parsed()) return pipeline::run_solve(cfg, out, std::cout);
            if (verify->parsed()) return pipeline::run_verify(cfg, checkpoint, out, std::cout);
            return pipeline::run_legendre(cfg, out, std::cout);
        },
        std::cerr);
}
