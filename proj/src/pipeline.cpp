#include "serrin/pipeline.hpp"

#include "serrin/errors.hpp"
#include "serrin/io.hpp"
#include "serrin/legendre.hpp"
#include "serrin/radial.hpp"
#include "serrin/symfun.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

namespace serrin::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string dump(const json& j) { return j.dump(2); }

// half-decade window ending at the outermost kept sample
json fit_entry(const std::string& name, const std::vector<double>& r, const std::vector<double>& g,
               double expected) {
    json e{{"name", name}, {"expected_beta", expected}};
    if (r.empty()) {
        e["skipped"] = "no samples";
        return e;
    }
    const double r_hi = *std::max_element(r.begin(), r.end());
    const double r_lo = r_hi / std::sqrt(10.0);
    try {
        const auto f = decay_fit(r, g, r_lo, r_hi, true);
        e["beta"] = f.beta;
        e["C"] = f.C;
        e["residual"] = f.residual;
        e["window"] = {f.r_lo, f.r_hi};
        e["samples"] = f.samples;
        e["degenerate"] = f.degenerate;
        // half a decade on a truncated annulus: the widened band is 20%
        e["tolerance"] = 0.2 * std::abs(expected);
        e["within_tolerance"] = !f.degenerate && std::abs(f.beta - expected) <= 0.2 * std::abs(expected);
    } catch (const WindowError& err) {
        e["skipped"] = err.what();
    }
    return e;
}

json entry_json(const std::string& name, double value, double tol, bool pass) {
    return {{"check", name}, {"value", value}, {"tolerance", tol}, {"pass", pass}};
}

// three-point derivatives on a non-uniform line, four-point one-sided at the ends
void line_derivatives(std::span<const double> r, std::span<const double> u, std::vector<double>& d1,
                      std::vector<double>& d2) {
    const std::size_t n = r.size();
    d1.assign(n, 0.0);
    d2.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::array<std::size_t, 4> idx{};
        std::size_t cnt = 3;
        if (i == 0) {
            idx = {0, 1, 2, 3};
            cnt = 4;
        } else if (i == n - 1) {
            idx = {n - 1, n - 2, n - 3, n - 4};
            cnt = 4;
        } else {
            idx = {i - 1, i, i + 1, 0};
        }
        std::array<double, 4> x{}, w1{}, w2{};
        for (std::size_t s = 0; s < cnt; ++s) x[s] = r[idx[s]];
        fd_weights(r[i], std::span<const double>(x.data(), cnt), std::span<double>(w1.data(), cnt),
                   std::span<double>(w2.data(), cnt));
        for (std::size_t s = 0; s < cnt; ++s) d1[i] += w1[s] * u[idx[s]];
        for (std::size_t s = 0; s < cnt; ++s) d2[i] += w2[s] * u[idx[s]];
    }
}

bool is_identity(const ReducedProblem& red) {
    return std::all_of(red.lambda.begin(), red.lambda.end(), [](double l) { return std::abs(l - 1.0) <= 1e-12; });
}

void check_c(const ProblemSpec& spec) {
    const double cb = cbar(spec.A, spec.b);
    // c = c_bar is kept: for A = I it is the ball solution
    if (spec.c > cb + 1e-12 * (1.0 + std::abs(cb))) {
        throw AdmissibilityError("c = " + io::format_double(spec.c) + " must not exceed c_bar(A,b) = " +
                                 io::format_double(cb));
    }
}

std::vector<double> radial_radii(const RunConfig& cfg, double R) {
    return SphericalGrid::shell(1.0, R, cfg.grid.n_r, 2, 4, cfg.grid.max_first_spacing).r();
}

std::string indexed(const char* stem, std::size_t i, const char* ext) {
    return std::string(stem) + std::to_string(i) + ext;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Report verify_shell(const RunConfig& cfg, const ReducedProblem& red, const AnnulusField& field) {
    Report v;
    const auto& tol = cfg.verify;
    const double c = red.c_reduced;

    // comparison sandwich against the t = 1 barriers
    AnnulusProblem ap(red.aniso, c, field.grid);
    ap.set_t(1.0);
    double lower = std::numeric_limits<double>::infinity(), upper = lower;
    for (std::size_t n = 0; n < field.u.size(); ++n) {
        lower = std::min(lower, field.u[n] - ap.lower()[n]);
        upper = std::min(upper, ap.upper()[n] - field.u[n]);
    }
    const bool sandwich = lower >= -tol.sandwich && upper >= -tol.sandwich;

    const Recovery rec = recover_primal(field);
    const auto& fb = rec.boundary;
    const bool fb_u = fb.max_abs_u <= tol.free_boundary_u;
    const bool fb_grad = fb.max_grad_dev <= tol.free_boundary_grad;
    const bool convex = fb.min_support_hessian > 0.0;
    const IdentityReport ir = rigidity_identities(rec.dual, field.k, c, tol.identities);
    const bool phi_ok = ir.find("phi_positivity")->pass;
    const bool mac_ok = ir.find("maclaurin")->pass;
    const AngularBound ab = angular_derivative_bound(field);

    json checks = json::array();
    checks.push_back(entry_json("sandwich_lower_margin", lower, tol.sandwich, lower >= -tol.sandwich));
    checks.push_back(entry_json("sandwich_upper_margin", upper, tol.sandwich, upper >= -tol.sandwich));
    checks.push_back(entry_json("free_boundary_max_abs_u", fb.max_abs_u, tol.free_boundary_u, fb_u));
    checks.push_back(entry_json("free_boundary_max_grad_dev", fb.max_grad_dev, tol.free_boundary_grad, fb_grad));
    checks.push_back(entry_json("boundary_convexity_min_eigenvalue", fb.min_support_hessian, 0.0, convex));

    v.identities = ir.to_json();
    v.identities["checks"] = checks;
    v.identities["boundary"] = {{"euler_characteristic", fb.euler},
                                {"closed", fb.closed},
                                {"vertices", fb.vertices.size()},
                                {"triangles", fb.triangles.size()},
                                {"radius_min", fb.radius_min},
                                {"radius_max", fb.radius_max},
                                {"radius_ratio", fb.radius_ratio()},
                                {"mesh_area", fb.area},
                                {"mesh_volume", fb.volume},
                                {"min_x_dot_nu", fb.min_support}};
    v.identities["informational"] = {
        {"primal_equation_residual", equation_residual_primal(rec.primal, field.k)},
        {"gradient_image_outer_reach", rec.primal.outer_reach},
        {"max_rotational_derivative", ab.max_rotational},
        {"rotational_bound", ab.bound},
        {"rotational_bound_holds", ab.holds}};
    v.pass = sandwich && fb_u && fb_grad && convex && phi_ok && mac_ok;
    v.identities["pass"] = v.pass;

    const auto& a = red.aniso.a;
    auto [rd, gd] = dual_deviation_envelope(rec.dual, a, c);
    auto [rp, gp] = primal_deviation_envelope(rec.primal, a, c);
    auto [rh, gh] = hessian_deviation_envelope(rec.primal, a);
    v.decay = {{"fits",
                {fit_entry("dual_deviation", rd, gd, red.aniso.dstar - 2.0),
                 fit_entry("primal_deviation", rp, gp, red.aniso.dstar - 2.0),
                 fit_entry("hessian_deviation", rh, gh, 2.0)}},
               {"excluded_outer_fraction", 0.2}};
    v.boundary = fb;
    return v;
}

Report verify_radial(const RunConfig& cfg, double c, std::span<const double> r,
                           std::span<const double> u) {
    Report v;
    const int d = cfg.d, k = cfg.k;
    const auto& tol = cfg.verify;
    const std::size_t n = r.size();
    std::vector<double> du, d2u;
    line_derivatives(r, u, du, d2u);

    const auto aniso = AnisotropyVec::make(std::vector<double>(static_cast<std::size_t>(d), 1.0), k);
    const Subsolution sub = make_subsolution(aniso, c);
    const auto low = sub.profile_batch(r);
    double lower = std::numeric_limits<double>::infinity(), upper = lower;
    for (std::size_t i = 0; i < n; ++i) {
        lower = std::min(lower, u[i] - low[i]);
        upper = std::min(upper, 0.5 * r[i] * r[i] - c - u[i]);
    }
    const bool sandwich = lower >= -tol.sandwich && upper >= -tol.sandwich;

    // primal along the ray: x = u*'(r), u = r u*' - u*, |Du| = d(r u*' - u*)/d(u*')
    std::vector<double> prim(n), dprim, d2prim;
    for (std::size_t i = 0; i < n; ++i) prim[i] = r[i] * du[i] - u[i];
    line_derivatives(r, prim, dprim, d2prim);
    const double u_b = prim[0];
    // chain rule with matching stencils: d(primal)/d(x) = D_r(primal) / D_r(u*')
    std::vector<double> ddu, unused;
    line_derivatives(r, du, ddu, unused);
    const double grad_b = dprim[0] / ddu[0];
    const bool fb_u = std::abs(u_b) <= tol.free_boundary_u;
    const bool fb_grad = std::abs(grad_b - 1.0) <= tol.free_boundary_grad;

    const double sphere = 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
    const double w = du[0];  // tangential block of D^2u* at |p| = 1
    const double volume = sphere * u[0] * std::pow(w, d - 1) / d;
    const double area = sphere * std::pow(w, d - 1);
    IdentityReport ir;
    ir.min_x_dot_nu = w;
    ir.enclosed_volume = volume;
    ir.boundary_area = area;
    IdentityEntry e1{"curvature_volume", sphere * binomial(d - 1, d - k) * std::pow(w, d - k),
                     k * binomial(d, k) * volume, 0.0, tol.identities.curvature, false};
    e1.gap = e1.lhs - e1.rhs;
    e1.pass = std::abs(e1.gap) <= tol.identities.curvature;
    ir.entries.push_back(e1);
    if (k == 1) {
        IdentityEntry e2{"area_volume", area, d * volume, 0.0, tol.identities.area, false};
        e2.gap = e2.lhs - e2.rhs;
        e2.pass = std::abs(e2.gap) <= tol.identities.area;
        ir.entries.push_back(e2);
    }
    double phi_min = std::numeric_limits<double>::infinity();
    double mac_min = phi_min, lap_min = phi_min;
    const double ck = binomial(d, k);
    for (std::size_t i = 0; i < n; ++i) {
        phi_min = std::min(phi_min, 2.0 * u[i] - r[i] * du[i]);
        if (i == 0 || i == n - 1) continue;
        std::vector<double> lam(static_cast<std::size_t>(d), r[i] / du[i]);
        lam[0] = 1.0 / d2u[i];
        double lap = 0.0;
        for (double l : lam) lap += l;
        lap_min = std::min(lap_min, lap);
        mac_min = std::min(mac_min, lap - d * std::pow(sigma_k(lam, k) / ck, 1.0 / k));
    }
    IdentityEntry e3{"phi_positivity", phi_min, 0.0, phi_min, tol.identities.phi, c >= 0.0 || phi_min >= -tol.identities.phi};
    IdentityEntry e4{"maclaurin", mac_min, 0.0, mac_min, tol.identities.maclaurin, mac_min >= -tol.identities.maclaurin};
    IdentityEntry e5{"laplacian_lower_bound", lap_min, static_cast<double>(d), lap_min - d, 0.0, true};
    ir.entries.push_back(e3);
    ir.entries.push_back(e4);
    ir.entries.push_back(e5);

    json checks = json::array();
    checks.push_back(entry_json("sandwich_lower_margin", lower, tol.sandwich, lower >= -tol.sandwich));
    checks.push_back(entry_json("sandwich_upper_margin", upper, tol.sandwich, upper >= -tol.sandwich));
    checks.push_back(entry_json("free_boundary_max_abs_u", std::abs(u_b), tol.free_boundary_u, fb_u));
    checks.push_back(entry_json("free_boundary_max_grad_dev", std::abs(grad_b - 1.0), tol.free_boundary_grad, fb_grad));

    v.identities = ir.to_json();
    v.identities["checks"] = checks;
    json boundary{{"radius", w}, {"radius_ratio", 1.0}};
    if (k < d) {
        try {
            boundary["radius_oracle"] = r0_for_mu(c, k, d);
        } catch (const std::exception&) {
            boundary["radius_oracle"] = nullptr;
        }
    }
    v.identities["boundary"] = boundary;
    v.pass = sandwich && fb_u && fb_grad && e3.pass && e4.pass;
    v.identities["pass"] = v.pass;

    std::vector<double> rr, gg;
    const double cap = r.front() + 0.8 * (r.back() - r.front());
    for (std::size_t i = 0; i < n; ++i) {
        if (r[i] > cap * (1.0 + 1e-14)) break;
        rr.push_back(r[i]);
        gg.push_back(std::abs(u[i] - 0.5 * r[i] * r[i] + c));
    }
    v.decay = {{"fits", {fit_entry("dual_deviation", rr, gg, aniso.dstar - 2.0)}},
               {"excluded_outer_fraction", 0.2}};
    return v;
}

// ---- commands ------------------------------------------------------------------------------

int run_constants(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    validate(cfg, true);
    if (cfg.d < 3) throw DomainError("constants need d >= 3");
    const auto spec = cfg.problem();
    const auto red = reduce(spec);
    const double cs = cstar(cfg.k, cfg.d, spec.b);
    const double ch = cfg.k < cfg.d ? chat(cfg.k, cfg.d) : kNaN;
    const double cb = cbar(spec.A, spec.b);
    const double r2 = convexity_threshold(cfg.k, cfg.d);
    const auto& an = red.aniso;
    io::write_csv(out / "constants.csv", {"d", "k", "c_star", "c_hat", "c_bar", "r2", "dstar", "t_lower", "eta"},
                  {{double(cfg.d)}, {double(cfg.k)}, {cs}, {ch}, {cb}, {r2}, {an.dstar}, {an.t_lower}, {an.eta}});
    json j{{"d", cfg.d},   {"k", cfg.k},         {"c_star", cs},           {"c_hat", std::isnan(ch) ? json(nullptr) : json(ch)},
           {"c_bar", cb},  {"r2", r2},           {"dstar", an.dstar},      {"t_lower", an.t_lower},
           {"eta", an.eta}, {"a", an.a}};
    io::write_text(out / "constants.json", dump(j));
    log << "c_star = " << io::format_double(cs) << "\nc_hat  = " << (std::isnan(ch) ? "n/a (k = d)" : io::format_double(ch))
        << "\nc_bar  = " << io::format_double(cb) << "\nr2     = " << io::format_double(r2)
        << "\nd*     = " << io::format_double(an.dstar) << "\nt_low  = " << io::format_double(an.t_lower)
        << "\neta    = " << io::format_double(an.eta) << '\n';
    return Pass;
}

int run_radial(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    validate(cfg, false);
    const auto& o = cfg.radial;
    const auto prof = radial_primal(o.r0, cfg.k, cfg.d, o.rmax, o.npts, o.spacing, o.allow_k_convex);
    io::write_csv(out / "radial.csv", {"r", "u", "du", "h", "deviation"},
                  {prof.r, prof.u, prof.du, prof.h, prof.deviation});
    json meta{{"r0", o.r0},     {"k", cfg.k},
              {"d", cfg.d},     {"C", prof.C},
              {"mu", std::isnan(prof.mu) ? json(nullptr) : json(prof.mu)},
              {"r2", prof.r2},  {"convex_branch", prof.convex_branch},
              {"rmax", o.rmax}, {"npts", o.npts},
              {"spacing", o.spacing == Spacing::Uniform ? "uniform" : "geometric"}};
    if (!prof.convex_branch) {
        double until = prof.r.front();
        for (std::size_t i = 0; i < prof.r.size(); ++i)
            if (prof.d2u[i] < 0.0) until = prof.r[i];
        meta["nonconvex_until"] = until;
        meta["note"] = "k-convex branch: u'' < 0 on the sampled radii up to nonconvex_until";
    }
    io::write_text(out / "radial.json", dump(meta));
    log << "radial profile: " << prof.r.size() << " samples, mu(r0) = "
        << (std::isnan(prof.mu) ? std::string("n/a") : io::format_double(prof.mu)) << '\n';
    return Pass;
}

int run_solve(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    validate(cfg, true);
    const auto spec = cfg.problem();
    const auto red = reduce(spec);
    check_c(spec);
    if (!(red.aniso.dstar > 2.0)) {
        throw DecayConditionError("d_k^*(a) = " + io::format_double(red.aniso.dstar) +
                                  " does not exceed 2; the exterior problem has no bounded dual tail");
    }
    fs::create_directories(out);
    io::write_text(out / "run.json", dump(cfg.to_json()));
    json timings;
    const auto t_all = std::chrono::steady_clock::now();

    if (cfg.d != 3) {
        if (!is_identity(red)) throw DomainError("d != 3 is solved on the radial path, which needs A = I");
        std::vector<std::vector<double>> us;
        std::vector<double> disc;
        for (std::size_t i = 0; i < cfg.R.size(); ++i) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto sol = solve_radial_dual(cfg.d, cfg.k, red.c_reduced, cfg.R[i], cfg.grid.n_r,
                                               cfg.grid.max_first_spacing, 1e-12, true);
            timings["R" + std::to_string(i)] = seconds_since(t0);
            io::CheckpointHeader h{cfg.d, cfg.k, cfg.R[i], 1.0, cfg.grid.n_r, 1, 1};
            io::write_checkpoint(out / indexed("field_R", i, ".bin"), h, sol.u);
            io::write_csv(out / indexed("radial_dual_R", i, ".csv"), {"r", "u", "du"}, {sol.r, sol.u, sol.du});
            if (!us.empty()) {
                // three-point Lagrange interpolation of the new solution onto the previous radii inside R_prev / 2
                const auto rp = radial_radii(cfg, cfg.R[i - 1]);
                const std::size_t m = sol.r.size();
                double worst = 0.0;
                for (std::size_t q = 0; q < rp.size() && rp[q] <= 0.5 * cfg.R[i - 1]; ++q) {
                    const auto it = std::upper_bound(sol.r.begin(), sol.r.end(), rp[q]);
                    const std::size_t lo = std::min<std::size_t>(
                        static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - sol.r.begin() - 2, 0)), m - 3);
                    double val = 0.0;
                    for (std::size_t a = lo; a < lo + 3; ++a) {
                        double l = 1.0;
                        for (std::size_t b = lo; b < lo + 3; ++b)
                            if (b != a) l *= (rp[q] - sol.r[b]) / (sol.r[a] - sol.r[b]);
                        val += l * sol.u[a];
                    }
                    worst = std::max(worst, std::abs(val - us.back()[q]));
                }
                disc.push_back(worst);
            }
            us.push_back(sol.u);
            log << "R = " << io::format_double(cfg.R[i]) << ": radial dual solved in " << sol.newton_iterations
                << " Newton iterations\n";
        }
        json summary{{"path", "radial"}, {"R", cfg.R}, {"discrepancy", disc}};
        io::write_text(out / "solve.json", dump(summary));
        Report v;
        try {
            v = verify_radial(cfg, red.c_reduced, radial_radii(cfg, cfg.R.back()), us.back());
        } catch (const std::exception& e) {
            log << "verification failed: " << e.what() << '\n';
            return Verification;
        }
        io::write_text(out / "identities.json", dump(v.identities));
        io::write_text(out / "decay.json", dump(v.decay));
        timings["total"] = seconds_since(t_all);
        io::write_text(out / "timings.json", dump(timings));
        log << "verification " << (v.pass ? "passed" : "FAILED") << '\n';
        return v.pass ? Pass : Verification;
    }

    std::vector<SolveReport> reports;
    std::size_t step = 0;
    auto on_accept = [&](const AnnulusField& f) {
        if (!cfg.checkpoint_steps) return;
        std::size_t ri = 0;
        while (ri + 1 < cfg.R.size() && cfg.R[ri] != f.R()) ++ri;
        io::write_checkpoint(out / "steps" / ("R" + std::to_string(ri) + "_step" + std::to_string(step++) + ".bin"), f);
    };
    auto [fields, ext] = extend_R(red, cfg.R, cfg.grid, cfg.solver, &reports, on_accept);

    std::vector<double> cR, ct, cdt, cacc, cit, ceq, crob, cdir, clo, cup, cok;
    json per_R = json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& rep = reports[i];
        for (const auto& s : rep.steps) {
            cR.push_back(rep.R);
            ct.push_back(s.t);
            cdt.push_back(s.dt);
            cacc.push_back(s.accepted);
            cit.push_back(s.newton_iterations);
            ceq.push_back(s.equation_residual);
            crob.push_back(s.robin_residual);
            cdir.push_back(s.dirichlet_residual);
            clo.push_back(s.lower_margin);
            cup.push_back(s.upper_margin);
            cok.push_back(s.bounds_ok);
        }
        per_R.push_back({{"R", rep.R},
                         {"converged", rep.converged},
                         {"t0_residual", rep.t0_residual},
                         {"r1_estimate", rep.r1_estimate},
                         {"total_newton", rep.total_newton},
                         {"steps", rep.steps.size()}});
        timings["R" + std::to_string(i)] = rep.seconds;
        io::write_checkpoint(out / indexed("field_R", i, ".bin"), fields[i]);
        if (!rep.converged) {
            log << "continuation did not reach t = 1 at R = " << io::format_double(rep.R) << '\n';
            return Solver;
        }
    }
    io::write_csv(out / "steps.csv",
                  {"R", "t", "dt", "accepted", "newton_iterations", "equation_residual", "robin_residual",
                   "dirichlet_residual", "lower_margin", "upper_margin", "bounds_ok"},
                  {cR, ct, cdt, cacc, cit, ceq, crob, cdir, clo, cup, cok});
    json summary{{"path", "shell"},
                 {"runs", per_R},
                 {"extension", {{"R", ext.R}, {"discrepancy", ext.discrepancy}, {"monotone", ext.monotone},
                                {"warning", ext.warning}}}};
    io::write_text(out / "solve.json", dump(summary));
    if (!ext.warning.empty()) log << "warning: " << ext.warning << '\n';

    Report v;
    try {
        v = verify_shell(cfg, red, fields.back());
    } catch (const std::exception& e) {
        log << "verification failed: " << e.what() << '\n';
        return Verification;
    }
    io::write_text(out / "identities.json", dump(v.identities));
    io::write_text(out / "decay.json", dump(v.decay));
    const auto to_world = [&red](const Eigen::Vector3d& y) -> Eigen::Vector3d {
        return red.to_original(Eigen::VectorXd(y));
    };
    io::write_off(out / "boundary.off", *v.boundary, to_world);
    timings["total"] = seconds_since(t_all);
    io::write_text(out / "timings.json", dump(timings));
    log << "boundary radius ratio " << io::format_double(v.boundary->radius_ratio()) << ", verification "
        << (v.pass ? "passed" : "FAILED") << '\n';
    return v.pass ? Pass : Verification;
}

int run_verify(const RunConfig& cfg, const fs::path& checkpoint, const fs::path& out, std::ostream& log) {
    validate(cfg, true);
    const auto spec = cfg.problem();
    const auto red = reduce(spec);
    const auto cp = io::read_checkpoint(checkpoint);
    io::CheckpointHeader want;
    want.d = cfg.d;
    want.k = cfg.k;
    want.R = cfg.R.back();
    for (double R : cfg.R)
        if (R == cp.header.R) want.R = R;
    want.n_r = cfg.grid.n_r;
    want.n_theta = cfg.d == 3 ? cfg.grid.n_theta : 1;
    want.n_phi = cfg.d == 3 ? cfg.grid.n_phi : 1;
    io::check_header(cp.header, want);

    Report v;
    if (cfg.d == 3) {
        AnnulusField f;
        f.grid = SphericalGrid::shell(1.0, want.R, cfg.grid.n_r, cfg.grid.n_theta, cfg.grid.n_phi,
                                      cfg.grid.max_first_spacing);
        f.u = cp.values;
        f.t = cp.header.t;
        f.k = cfg.k;
        f.c = red.c_reduced;
        f.aniso = red.aniso;
        v = verify_shell(cfg, red, f);
        const auto to_world = [&red](const Eigen::Vector3d& y) -> Eigen::Vector3d {
            return red.to_original(Eigen::VectorXd(y));
        };
        io::write_off(out / "boundary.off", *v.boundary, to_world);
    } else {
        v = verify_radial(cfg, red.c_reduced, radial_radii(cfg, want.R), cp.values);
    }
    io::write_text(out / "identities.json", dump(v.identities));
    io::write_text(out / "decay.json", dump(v.decay));
    log << "verification " << (v.pass ? "passed" : "FAILED") << '\n';
    return v.pass ? Pass : Verification;
}

int run_legendre(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    validate(cfg, false);
    if (cfg.d != 3) throw DomainError("the standalone transform works on shells in d = 3");
    const auto& o = cfg.legendre;
    SampledConvexFn f;
    if (o.input.empty()) {
        // the radial primal sampled on a uniform shell from its inner radius
        const auto prof = radial_primal(cfg.radial.r0, cfg.k, 3, o.source_r_out, o.source_n_r, Spacing::Uniform);
        f.grid = SphericalGrid::with_radii(prof.r, o.n_theta, o.n_phi);
        f.value.resize(f.grid.size());
        const std::size_t ring = static_cast<std::size_t>(o.n_theta) * static_cast<std::size_t>(o.n_phi);
        for (std::size_t i = 0; i < prof.r.size(); ++i)
            for (std::size_t q = 0; q < ring; ++q) f.value[i * ring + q] = prof.u[i];
        f.differentiate();
    } else {
        const auto grid = SphericalGrid::shell(o.source_r_in, o.source_r_out, o.source_n_r, o.n_theta, o.n_phi,
                                               o.source_r_out - o.source_r_in);
        const auto tab = io::read_csv(o.input);
        const auto& X = tab.column("x");
        const auto& Y = tab.column("y");
        const auto& Z = tab.column("z");
        const auto& V = tab.column("value");
        if (V.size() != grid.size()) {
            throw FormatError("legendre input has " + std::to_string(V.size()) + " rows, the source grid has " +
                              std::to_string(grid.size()) + " nodes");
        }
        f.grid = grid;
        f.value = V;
        for (int i = 0; i < grid.n_r(); ++i)
            for (int j = 0; j < grid.n_theta(); ++j)
                for (int m = 0; m < grid.n_phi(); ++m) {
                    const std::size_t n = grid.index(i, j, m);
                    const Eigen::Vector3d x(X[n], Y[n], Z[n]);
                    if ((x - grid.point(i, j, m)).norm() > 1e-9 * grid.r_outer())
                        throw FormatError("legendre input row " + std::to_string(n + 2) + " is not at its grid node");
                }
        f.differentiate();
    }
    const auto targets = SphericalGrid::shell(o.target_r_in, o.target_r_out, o.target_n_r, o.n_theta, o.n_phi,
                                              o.target_r_out - o.target_r_in);
    const auto fs_ = legendre_transform(f, targets);
    std::vector<double> px, py, pz, val, xx, xy, xz;
    for (int i = 0; i < targets.n_r(); ++i)
        for (int j = 0; j < targets.n_theta(); ++j)
            for (int m = 0; m < targets.n_phi(); ++m) {
                const std::size_t n = targets.index(i, j, m);
                const auto p = targets.point(i, j, m);
                px.push_back(p.x());
                py.push_back(p.y());
                pz.push_back(p.z());
                val.push_back(fs_.value[n]);
                xx.push_back(fs_.matched[n].x());
                xy.push_back(fs_.matched[n].y());
                xz.push_back(fs_.matched[n].z());
            }
    io::write_csv(out / "legendre.csv", {"px", "py", "pz", "value", "x", "y", "z"}, {px, py, pz, val, xx, xy, xz});
    const double target = o.target_value > 0.0 ? o.target_value : 1.0 / binomial(3, cfg.k);
    const auto fy = fenchel_young(f, fs_);
    json j{{"source_convexity_certificate", f.convexity_certificate},
           {"source_grid_scale", f.grid.grid_scale()},
           {"target_grid_scale", targets.grid_scale()},
           {"quotient_target", target},
           {"quotient_residual", quotient_residual(fs_, cfg.k, target)},
           {"robin_residual", robin_check(fs_)},
           {"hessian_inverse_residual", hessian_inverse_check(f, fs_)},
           {"fenchel_young_min_gap", fy.min_gap},
           {"fenchel_young_matched_gap", fy.matched_gap}};
    io::write_text(out / "legendre.json", dump(j));
    log << "transformed " << targets.size() << " targets, quotient residual "
        << io::format_double(j["quotient_residual"].get<double>()) << '\n';
    return Pass;
}

int guarded(const std::function<int()>& body, std::ostream& err) {
    try {
        return body();
    } catch (const ConeError& e) {
        err << "solver error: " << e.what() << '\n';
        return Solver;
    } catch (const ContinuationError& e) {
        err << "solver error: " << e.what() << '\n';
        return Solver;
    } catch (const StagnationError& e) {
        err << "solver error: " << e.what() << '\n';
        return Solver;
    } catch (const TopologyError& e) {
        err << "verification error: " << e.what() << '\n';
        return Verification;
    } catch (const FormatError& e) {
        err << "format error: " << e.what() << '\n';
        return Validation;
    } catch (const std::domain_error& e) {
        err << "validation error: " << e.what() << '\n';
        return Validation;
    } catch (const nlohmann::json::exception& e) {
        err << "config error: " << e.what() << '\n';
        return Validation;
    } catch (const fs::filesystem_error& e) {
        err << "file error: " << e.what() << '\n';
        return Validation;
    }
}

}  // namespace serrin::pipeline
