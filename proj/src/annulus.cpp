#include "serrin/annulus.hpp"

#include "serrin/errors.hpp"
#include "serrin/symfun.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace serrin {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

std::string node_label(const SphericalGrid& g, int i, int j, int m) {
    std::ostringstream os;
    os << "node (i=" << i << ", j=" << j << ", m=" << m << ") at r=" << g.r(i)
       << ", theta=" << g.theta(j) << ", phi=" << g.phi(m);
    return os.str();
}

}  // namespace

// ---- AnnulusProblem ----------------------------------------------------------------------

AnnulusProblem::AnnulusProblem(AnisotropyVec target, double c, SphericalGrid grid)
    : target_(std::move(target)), c_(c), grid_(std::move(grid)) {
    if (target_.d != 3) throw DomainError("the shell solver is three-dimensional");
    if (grid_.r_inner() != 1.0) throw DomainError("the dual shell must start at radius 1");
    set_t(0.0);
}

std::vector<double> AnnulusProblem::subsolution_nodes(const Subsolution& s) const {
    std::vector<double> rho(grid_.size());
    const auto& a = s.aniso().a;
    for (int i = 0; i < grid_.n_r(); ++i)
        for (int j = 0; j < grid_.n_theta(); ++j)
            for (int m = 0; m < grid_.n_phi(); ++m) {
                const Eigen::Vector3d p = grid_.point(i, j, m);
                rho[grid_.index(i, j, m)] =
                    std::sqrt(a[0] * p.x() * p.x() + a[1] * p.y() * p.y() + a[2] * p.z() * p.z());
            }
    return s.profile_batch(rho);
}

void AnnulusProblem::set_t(double t) {
    if (t < 0.0 || t > 1.0) throw DomainError("continuation parameter must lie in [0, 1]");
    if (t == t_) return;
    t_ = t;
    path_ = target_.along_path(t);
    sub_.emplace(make_subsolution(path_, c_));
    rhs_root_ = std::pow(path_.quotient_rhs(), 1.0 / target_.k);
    lower_ = subsolution_nodes(*sub_);
    upper_.resize(grid_.size());
    const auto& a = path_.a;
    for (int i = 0; i < grid_.n_r(); ++i)
        for (int j = 0; j < grid_.n_theta(); ++j)
            for (int m = 0; m < grid_.n_phi(); ++m) {
                const Eigen::Vector3d p = grid_.point(i, j, m);
                upper_[grid_.index(i, j, m)] =
                    0.5 * (a[0] * p.x() * p.x() + a[1] * p.y() * p.y() + a[2] * p.z() * p.z()) - c_;
            }
    // Truncation error of the scheme on omega_lower_t, measured against its closed-form
    // derivatives. Subtracting it keeps the scheme consistent, makes omega_lower_0 an exact
    // discrete solution at t = 0, and leaves the discrete error governed by u - omega_lower_t.
    const auto& g = grid_;
    psi_.assign(static_cast<std::size_t>(g.n_theta()) * g.n_phi(), 0.0);
    robin_corr_.assign(psi_.size(), 0.0);
    eq_corr_.assign(g.size(), 0.0);
    Stencil st;
    for (int j = 0; j < g.n_theta(); ++j)
        for (int m = 0; m < g.n_phi(); ++m) {
            const Eigen::Vector3d p = g.unit(j, m);
            const double rho = sub_->metric_radius(std::span<const double>(p.data(), 3));
            const double dn = rho * rho * sub_->h(rho);
            const std::size_t ring = g.ring_index(j, m);
            psi_[ring] = lower_[g.index(0, j, m)] - dn;
            build_stencil(g, 0, j, m, st);
            robin_corr_[ring] = dn - st.apply(lower_)[Dr];
        }
    for (int i = 1; i < g.n_r() - 1; ++i)
        for (int j = 0; j < g.n_theta(); ++j) {
            const auto hc = frame_hessian_coefficients(g.r(i), g.sin_theta(j), g.cos_theta(j));
            for (int m = 0; m < g.n_phi(); ++m) {
                build_stencil(g, i, j, m, st);
                const Eigen::Vector3d p = g.point(i, j, m);
                const Eigen::Matrix3d exact = sub_->hessian(std::span<const double>(p.data(), 3));
                const auto H = frame_hessian(st.apply(lower_), hc);
                eq_corr_[g.index(i, j, m)] =
                    quotient3(H, target_.k).value - quotient3(exact, target_.k).value;
            }
        }
}

Eigen::VectorXd AnnulusProblem::residual(const std::vector<double>& u, ResidualParts* parts) const {
    const auto& g = grid_;
    Eigen::VectorXd res(static_cast<Eigen::Index>(g.size()));
    ResidualParts rp;
    const double w = 1.0 - t_;
    Stencil st;
    for (int i = 0; i < g.n_r(); ++i)
        for (int j = 0; j < g.n_theta(); ++j) {
            const auto hc = frame_hessian_coefficients(g.r(i), g.sin_theta(j), g.cos_theta(j));
            for (int m = 0; m < g.n_phi(); ++m) {
                const std::size_t n = g.index(i, j, m);
                double val;
                if (i == 0) {
                    build_stencil(g, i, j, m, st);
                    const auto d = st.apply(u);
                    const std::size_t ring = g.ring_index(j, m);
                    val = u[n] - d[Dr] - w * psi_[ring] - robin_corr_[ring];
                    rp.robin = std::max(rp.robin, std::abs(val));
                } else if (i == g.n_r() - 1) {
                    val = u[n] - lower_[n];
                    rp.dirichlet = std::max(rp.dirichlet, std::abs(val));
                } else {
                    build_stencil(g, i, j, m, st);
                    const auto H = frame_hessian(st.apply(u), hc);
                    double f;
                    try {
                        f = quotient3(H, target_.k).value;
                    } catch (const ConeError&) {
                        throw ConeError("discrete Hessian left the positive cone at " +
                                        node_label(g, i, j, m));
                    }
                    val = f - rhs_root_ - eq_corr_[n];
                    rp.equation = std::max(rp.equation, std::abs(val));
                }
                res(static_cast<Eigen::Index>(n)) = val;
            }
        }
    if (parts) *parts = rp;
    return res;
}

Eigen::SparseMatrix<double> AnnulusProblem::jacobian(const std::vector<double>& u) const {
    const auto& g = grid_;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(g.size() * 20);
    Stencil st;
    for (int i = 0; i < g.n_r(); ++i)
        for (int j = 0; j < g.n_theta(); ++j) {
            const auto hc = frame_hessian_coefficients(g.r(i), g.sin_theta(j), g.cos_theta(j));
            for (int m = 0; m < g.n_phi(); ++m) {
                const auto row = static_cast<int>(g.index(i, j, m));
                if (i == g.n_r() - 1) {
                    trip.emplace_back(row, row, 1.0);
                    continue;
                }
                build_stencil(g, i, j, m, st);
                if (i == 0) {
                    trip.emplace_back(row, row, 1.0);
                    for (int s = 0; s < st.count; ++s)
                        if (st.w[Dr][s] != 0.0)
                            trip.emplace_back(row, static_cast<int>(st.nodes[s]), -st.w[Dr][s]);
                    continue;
                }
                const auto H = frame_hessian(st.apply(u), hc);
                const auto q = quotient3(H, target_.k);
                // dF = sum_{a,b} F^{ab} dH_ab over ordered pairs
                std::array<double, NumDerivs> gq{};
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b)
                        for (int d = 0; d < NumDerivs; ++d) gq[d] += q.gradient(a, b) * hc[a][b][d];
                for (int s = 0; s < st.count; ++s) {
                    double v = 0.0;
                    for (int d = 0; d < NumDerivs; ++d) v += gq[d] * st.w[d][s];
                    if (v != 0.0) trip.emplace_back(row, static_cast<int>(st.nodes[s]), v);
                }
            }
        }
    const auto n = static_cast<Eigen::Index>(g.size());
    Eigen::SparseMatrix<double> J(n, n);
    J.setFromTriplets(trip.begin(), trip.end());
    J.makeCompressed();
    return J;
}

double AnnulusProblem::min_hessian_eigenvalue(const std::vector<double>& u) const {
    const auto& g = grid_;
    double lo = std::numeric_limits<double>::infinity();
    Stencil st;
    for (int i = 1; i < g.n_r() - 1; ++i)
        for (int j = 0; j < g.n_theta(); ++j) {
            const auto hc = frame_hessian_coefficients(g.r(i), g.sin_theta(j), g.cos_theta(j));
            for (int m = 0; m < g.n_phi(); ++m) {
                build_stencil(g, i, j, m, st);
                const Eigen::Matrix3d H = frame_hessian(st.apply(u), hc);
                Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(H, Eigen::EigenvaluesOnly);
                lo = std::min(lo, es.eigenvalues()(0));
            }
        }
    return lo;
}

// ---- Newton ------------------------------------------------------------------------------

Eigen::VectorXd solve_linear(const Eigen::SparseMatrix<double>& J, const Eigen::VectorXd& rhs,
                             const SolverControls& ctl) {
    auto direct = [&]() {
        Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
        lu.compute(J);
        if (lu.info() != Eigen::Success) throw StagnationError("sparse LU factorization failed");
        return Eigen::VectorXd(lu.solve(rhs));
    };
    if (static_cast<std::size_t>(J.rows()) < ctl.direct_limit) return direct();
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> it;
    it.preconditioner().setDroptol(1e-6);
    it.preconditioner().setFillfactor(20);
    it.setTolerance(ctl.linear_rtol);
    it.setMaxIterations(2000);
    it.compute(J);
    if (it.info() == Eigen::Success) {
        Eigen::VectorXd x = it.solve(rhs);
        if (it.info() == Eigen::Success) return x;
    }
    return direct();
}

double newton_step(const AnnulusProblem& prob, std::vector<double>& u, const SolverControls& ctl) {
    const Eigen::VectorXd r0 = prob.residual(u);
    const double n0 = r0.norm();
    const Eigen::VectorXd dx = solve_linear(prob.jacobian(u), -r0, ctl);
    std::vector<double> trial(u.size());
    double alpha = 1.0;
    for (int h = 0; h <= ctl.max_halvings; ++h, alpha *= 0.5) {
        for (std::size_t n = 0; n < u.size(); ++n)
            trial[n] = u[n] + alpha * dx(static_cast<Eigen::Index>(n));
        double n1;
        try {
            n1 = prob.residual(trial).norm();
        } catch (const ConeError&) {
            continue;  // convexity cap: shorten until the Hessian stays positive definite
        }
        if (n1 <= (1.0 - 1e-4 * alpha) * n0 || n1 == 0.0) {
            u.swap(trial);
            return alpha * dx.lpNorm<Eigen::Infinity>();
        }
    }
    throw StagnationError("line search failed after " + std::to_string(ctl.max_halvings) +
                          " halvings (residual norm " + std::to_string(n0) + ")");
}

NewtonResult newton_solve(const AnnulusProblem& prob, std::vector<double>& u,
                          const SolverControls& ctl) {
    NewtonResult res;
    double rn;
    try {
        rn = prob.residual(u).lpNorm<Eigen::Infinity>();
    } catch (const ConeError& e) {
        res.failure = e.what();
        return res;
    }
    while (rn > ctl.newton_tol) {
        if (res.iterations >= ctl.max_newton) {
            res.failure = "Newton iteration limit reached (residual " + std::to_string(rn) + ")";
            return res;
        }
        try {
            const double step = newton_step(prob, u, ctl);
            ++res.iterations;
            rn = prob.residual(u).lpNorm<Eigen::Infinity>();
            res.history.push_back(rn);
            if (step <= 1e-15 * (1.0 + max_abs(u)) && rn > ctl.newton_tol) {
                res.failure = "Newton step vanished above tolerance";
                return res;
            }
        } catch (const StagnationError& e) {
            res.failure = e.what();
            return res;
        } catch (const ConeError& e) {
            res.failure = e.what();
            return res;
        }
    }
    res.converged = true;
    return res;
}

// ---- closed-form helpers -----------------------------------------------------------------

std::vector<double> psi_t(const SphericalGrid& g, const AnisotropyVec& target, double c, double t) {
    const auto at = target.along_path(t);
    const Subsolution s = make_subsolution(at, c);
    std::vector<double> out(static_cast<std::size_t>(g.n_theta()) * g.n_phi());
    for (int j = 0; j < g.n_theta(); ++j)
        for (int m = 0; m < g.n_phi(); ++m) {
            const Eigen::Vector3d p = g.unit(j, m);
            const double rho = s.metric_radius(std::span<const double>(p.data(), 3));
            // d/dn at |p| = 1 is p.D omega = rho^2 h(rho)
            out[g.ring_index(j, m)] = s.profile(rho) - rho * rho * s.h(rho);
        }
    return out;
}

double r1_estimate(const AnisotropyVec& aniso, double c) {
    const Subsolution s = make_subsolution(aniso, c);
    if (s.C1() == 0.0) return 1.0;
    // the gap omega_upper - omega_lower equals tail(rho) with rho = eta |p| on the worst axis
    auto f = [&](double rho) { return s.tail(rho) - 1e-3; };
    double lo = aniso.eta, hi = 2.0 * lo;
    if (f(lo) <= 0.0) return 1.0;
    while (f(hi) > 0.0) hi *= 2.0;
    std::uintmax_t iters = 100;
    const auto br = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(30), iters);
    return 0.5 * (br.first + br.second) / aniso.eta;
}

// ---- continuation ------------------------------------------------------------------------

namespace {

void record_bounds(const AnnulusProblem& prob, const std::vector<double>& u, double tol_rel,
                   StepRecord& rec) {
    double lo = std::numeric_limits<double>::infinity(), hi = lo;
    for (std::size_t n = 0; n < u.size(); ++n) {
        lo = std::min(lo, u[n] - prob.lower()[n]);
        hi = std::min(hi, prob.upper()[n] - u[n]);
    }
    rec.lower_margin = lo;
    rec.upper_margin = hi;
    const double tol = tol_rel * (1.0 + max_abs(u));
    rec.bounds_ok = lo >= -tol && hi >= -tol;
}

}  // namespace

std::pair<AnnulusField, SolveReport> continuation_solve(
    const ReducedProblem& prob, double R, const GridControls& gc, const SolverControls& ctl,
    const std::function<void(const AnnulusField&)>& on_accept) {
    const auto t_start = Clock::now();
    const auto& spec = prob.original;
    if (spec.d != 3) throw DomainError("the shell solver needs d = 3; use the radial path for A = I");
    const double cb = cbar(spec.A, spec.b);
    if (spec.c > cb + 1e-12 * (1.0 + std::abs(cb))) {
        throw AdmissibilityError("c = " + std::to_string(spec.c) + " exceeds c_bar(A,b) = " +
                                 std::to_string(cb));
    }
    if (!(R >= ctl.min_R)) {
        throw DomainError("R = " + std::to_string(R) + " is below the minimum outer radius " +
                          std::to_string(ctl.min_R));
    }
    const auto& target = prob.aniso;
    const double c = prob.c_reduced;

    SolveReport rep;
    rep.R = R;
    rep.r1_estimate = r1_estimate(target, c);

    AnnulusProblem ap(target, c,
                      SphericalGrid::shell(1.0, R, gc.n_r, gc.n_theta, gc.n_phi,
                                           gc.max_first_spacing));
    AnnulusField field;
    field.grid = ap.grid();
    field.k = target.k;
    field.c = c;
    field.aniso = target;
    field.t = 0.0;
    field.u = ap.lower();

    {
        StepRecord rec;
        const auto t0 = Clock::now();
        ResidualParts parts;
        ap.residual(field.u, &parts);
        rep.t0_residual = parts.max();
        std::vector<double> u0 = field.u;
        const auto nr = newton_solve(ap, u0, ctl);
        rec.newton_iterations = nr.iterations;
        rec.residual_history = nr.history;
        if (!nr.converged) throw ContinuationError("t = 0 solve failed: " + nr.failure);
        field.u = std::move(u0);
        ap.residual(field.u, &parts);
        rec.t = 0.0;
        rec.accepted = true;
        rec.equation_residual = parts.equation;
        rec.robin_residual = parts.robin;
        rec.dirichlet_residual = parts.dirichlet;
        record_bounds(ap, field.u, ctl.bound_tol_rel, rec);
        rec.seconds = seconds_since(t0);
        rep.total_newton += rec.newton_iterations;
        rep.steps.push_back(rec);
        if (on_accept) on_accept(field);
    }

    double dt = std::min(ctl.dt_init, ctl.dt_max);
    while (field.t < 1.0) {
        const double t_new = std::min(1.0, field.t + dt);
        const auto t0 = Clock::now();
        StepRecord rec;
        rec.t = t_new;
        rec.dt = t_new - field.t;
        // predictor: shift by the change in the boundary-carrying subsolution
        std::vector<double> lower_prev = ap.lower();
        ap.set_t(t_new);
        std::vector<double> u = field.u;
        for (std::size_t n = 0; n < u.size(); ++n) u[n] += ap.lower()[n] - lower_prev[n];
        if (!(ap.min_hessian_eigenvalue(u) > 0.0)) u = field.u;
        const auto nr = newton_solve(ap, u, ctl);
        rec.newton_iterations = nr.iterations;
        rec.residual_history = nr.history;
        rep.total_newton += nr.iterations;
        if (!nr.converged) {
            rec.failure = nr.failure;
            rec.seconds = seconds_since(t0);
            rep.steps.push_back(rec);
            ap.set_t(field.t);
            dt *= 0.5;
            if (dt < ctl.dt_min) {
                rep.seconds = seconds_since(t_start);
                throw ContinuationError("continuation step fell below " +
                                        std::to_string(ctl.dt_min) + " at t = " +
                                        std::to_string(field.t) + ": " + nr.failure);
            }
            continue;
        }
        ResidualParts parts;
        ap.residual(u, &parts);
        rec.accepted = true;
        rec.equation_residual = parts.equation;
        rec.robin_residual = parts.robin;
        rec.dirichlet_residual = parts.dirichlet;
        record_bounds(ap, u, ctl.bound_tol_rel, rec);
        rec.seconds = seconds_since(t0);
        rep.steps.push_back(rec);
        field.u = std::move(u);
        field.t = t_new;
        if (on_accept) on_accept(field);
        if (nr.iterations <= ctl.easy_iterations) dt = std::min(ctl.dt_max, dt * ctl.dt_grow);
    }
    rep.converged = true;
    rep.seconds = seconds_since(t_start);
    return {std::move(field), std::move(rep)};
}

double field_discrepancy(const AnnulusField& a, const AnnulusField& b, double r_cap) {
    GridInterpolator interp(b.grid);
    double worst = 0.0;
    const auto& g = a.grid;
    for (int i = 0; i < g.n_r() && g.r(i) <= r_cap; ++i)
        for (int j = 0; j < g.n_theta(); ++j)
            for (int m = 0; m < g.n_phi(); ++m) {
                if (!interp.locate(g.point(i, j, m))) continue;
                worst = std::max(worst, std::abs(a.u[g.index(i, j, m)] - interp.eval(b.u)));
            }
    return worst;
}

std::pair<std::vector<AnnulusField>, ExtensionReport> extend_R(
    const ReducedProblem& prob, const std::vector<double>& R_list, const GridControls& grid,
    const SolverControls& ctl, std::vector<SolveReport>* reports,
    const std::function<void(const AnnulusField&)>& on_accept) {
    if (!std::is_sorted(R_list.begin(), R_list.end())) {
        throw DomainError("R schedule must be ascending");
    }
    std::vector<AnnulusField> fields;
    ExtensionReport er;
    for (double R : R_list) {
        auto [f, rep] = continuation_solve(prob, R, grid, ctl, on_accept);
        if (reports) reports->push_back(rep);
        er.R.push_back(R);
        if (!fields.empty()) {
            const double cap = 0.5 * fields.back().R();
            er.discrepancy.push_back(field_discrepancy(fields.back(), f, cap));
        }
        fields.push_back(std::move(f));
    }
    // two rises in a row flag a convergence warning
    int rising = 0;
    for (std::size_t i = 1; i < er.discrepancy.size(); ++i) {
        rising = er.discrepancy[i] >= er.discrepancy[i - 1] ? rising + 1 : 0;
        if (er.discrepancy[i] >= er.discrepancy[i - 1]) er.monotone = false;
        if (rising >= 2) er.warning = "discrepancy did not decrease across three consecutive R";
    }
    return {std::move(fields), std::move(er)};
}

// ---- angular derivatives -----------------------------------------------------------------

double max_rotational_derivative(const SphericalGrid& g, const std::vector<double>& u) {
    double worst = 0.0;
    Stencil st;
    for (int i = 0; i < g.n_r(); ++i)
        for (int j = 0; j < g.n_theta(); ++j)
            for (int m = 0; m < g.n_phi(); ++m) {
                build_stencil(g, i, j, m, st);
                const Eigen::Vector3d grad = cartesian_gradient(g, i, j, m, st.apply(u));
                const Eigen::Vector3d p = g.point(i, j, m);
                for (int a = 0; a < 3; ++a)
                    for (int b = a + 1; b < 3; ++b)
                        worst = std::max(worst, std::abs(p(a) * grad(b) - p(b) * grad(a)));
            }
    return worst;
}

AngularBound angular_derivative_bound(const AnnulusField& field) {
    const auto& g = field.grid;
    AngularBound out;
    out.max_rotational = max_rotational_derivative(g, field.u);

    const auto at = field.aniso.along_path(field.t);
    const Subsolution s = make_subsolution(at, field.c);
    // |T omega_lower| on the outer sphere from the closed-form gradient a_i p_i h
    double outer = 0.0;
    const int iR = g.n_r() - 1;
    for (int j = 0; j < g.n_theta(); ++j)
        for (int m = 0; m < g.n_phi(); ++m) {
            const Eigen::Vector3d p = g.point(iR, j, m);
            const auto vg = s.eval(std::span<const double>(p.data(), 3));
            for (int a = 0; a < 3; ++a)
                for (int b = a + 1; b < 3; ++b)
                    outer = std::max(outer, std::abs(p(a) * vg.grad[b] - p(b) * vg.grad[a]));
        }
    // tangential gradient of psi_t on the unit sphere, by centred angular differences
    const auto psi = psi_t(g, field.aniso, field.c, field.t);
    double dpsi = 0.0;
    for (int j = 0; j < g.n_theta(); ++j)
        for (int m = 0; m < g.n_phi(); ++m) {
            const auto [jp, mp] = g.wrap(j + 1, m);
            const auto [jm, mm] = g.wrap(j - 1, m);
            const double dth = (psi[g.ring_index(jp, mp)] - psi[g.ring_index(jm, mm)]) /
                               (2.0 * g.dtheta());
            const double dph = (psi[g.ring_index(j, (m + 1) % g.n_phi())] -
                                psi[g.ring_index(j, (m + g.n_phi() - 1) % g.n_phi())]) /
                               (2.0 * g.dphi() * g.sin_theta(j));
            dpsi = std::max(dpsi, std::hypot(dth, dph));
        }
    const double margin = 1e-6 * (1.0 + max_abs(field.u));
    out.bound = 2.0 * (1.0 - field.t) * dpsi + outer + margin;
    out.holds = out.max_rotational <= out.bound;
    return out;
}

// ---- radial fast path --------------------------------------------------------------------

RadialDualSolution solve_radial_dual(int d, int k, double c, double R, int n_r,
                                     double max_first_spacing, double tol, bool corrected) {
    if (d < 3 || k < 1 || k > d) throw DomainError("radial dual path needs d >= 3, 1 <= k <= d");
    const auto aniso = AnisotropyVec::make(std::vector<double>(static_cast<std::size_t>(d), 1.0), k);
    const Subsolution sub = make_subsolution(aniso, c);
    // reuse the shell radii so both paths share one notion of stretching
    const auto radii = SphericalGrid::shell(1.0, R, n_r, 2, 4, max_first_spacing).r();
    const int n = n_r;
    RadialDualSolution sol;
    sol.d = d;
    sol.k = k;
    sol.c = c;
    sol.r = radii;
    std::vector<double> u(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = sub.profile(radii[static_cast<std::size_t>(i)]);
    const double rhs_root = std::pow(1.0 / binomial(d, k), 1.0 / k);

    struct Row {
        std::array<int, 3> idx;
        std::array<double, 3> d1, d2;
    };
    std::vector<Row> rows(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Row rw;
        if (i == 0) rw.idx = {0, 1, 2};
        else if (i == n - 1) rw.idx = {n - 1, n - 2, n - 3};
        else rw.idx = {i - 1, i, i + 1};
        std::array<double, 3> x{};
        for (int s = 0; s < 3; ++s) x[static_cast<std::size_t>(s)] = radii[static_cast<std::size_t>(rw.idx[static_cast<std::size_t>(s)])];
        fd_weights(radii[static_cast<std::size_t>(i)], x, rw.d1, rw.d2);
        rows[static_cast<std::size_t>(i)] = rw;
    }
    using Eval = std::function<void(const std::vector<double>&, Eigen::VectorXd&, std::vector<Eigen::Triplet<double>>*)>;
    Eval eval = [&](const std::vector<double>& v, Eigen::VectorXd& F,
                    std::vector<Eigen::Triplet<double>>* trip) {
        F.resize(n);
        for (int i = 0; i < n; ++i) {
            const auto& rw = rows[static_cast<std::size_t>(i)];
            double du = 0.0, d2u = 0.0;
            for (int s = 0; s < 3; ++s) {
                du += rw.d1[static_cast<std::size_t>(s)] * v[static_cast<std::size_t>(rw.idx[static_cast<std::size_t>(s)])];
                d2u += rw.d2[static_cast<std::size_t>(s)] * v[static_cast<std::size_t>(rw.idx[static_cast<std::size_t>(s)])];
            }
            const double ri = radii[static_cast<std::size_t>(i)];
            if (i == 0) {
                F(i) = v[0] - du;
                if (trip) {
                    trip->emplace_back(0, 0, 1.0);
                    for (int s = 0; s < 3; ++s) trip->emplace_back(0, rw.idx[static_cast<std::size_t>(s)], -rw.d1[static_cast<std::size_t>(s)]);
                }
            } else if (i == n - 1) {
                F(i) = v[static_cast<std::size_t>(i)] - sub.profile(ri);
                if (trip) trip->emplace_back(i, i, 1.0);
            } else {
                std::vector<double> lam(static_cast<std::size_t>(d), du / ri);
                lam[0] = d2u;
                F(i) = quotient_value(lam, k) - rhs_root;
                if (trip) {
                    const auto gr = quotient_gradient(lam, k);
                    double gv = 0.0;
                    for (int a = 1; a < d; ++a) gv += gr[static_cast<std::size_t>(a)];
                    for (int s = 0; s < 3; ++s)
                        trip->emplace_back(i, rw.idx[static_cast<std::size_t>(s)],
                                           gr[0] * rw.d2[static_cast<std::size_t>(s)] + gv * rw.d1[static_cast<std::size_t>(s)] / ri);
                }
            }
        }
    };
    // for A = I the subsolution is the exact dual solution, so its discrete residual is pure truncation error
    Eigen::VectorXd tau = Eigen::VectorXd::Zero(n);
    if (corrected) {
        eval(u, tau, nullptr);
        Eval plain = eval;
        eval = [plain, &tau](const std::vector<double>& v, Eigen::VectorXd& F,
                             std::vector<Eigen::Triplet<double>>* trip) {
            plain(v, F, trip);
            F -= tau;
        };
    }
    Eigen::VectorXd F;
    for (int it = 0; it < 60; ++it) {
        std::vector<Eigen::Triplet<double>> trip;
        eval(u, F, &trip);
        if (F.lpNorm<Eigen::Infinity>() <= tol) break;
        Eigen::SparseMatrix<double> J(n, n);
        J.setFromTriplets(trip.begin(), trip.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(J);
        const Eigen::VectorXd dx = lu.solve(-F);
        double alpha = 1.0;
        const double n0 = F.norm();
        std::vector<double> trial(u.size());
        bool ok = false;
        for (int h = 0; h < 30 && !ok; ++h, alpha *= 0.5) {
            for (int i = 0; i < n; ++i) trial[static_cast<std::size_t>(i)] = u[static_cast<std::size_t>(i)] + alpha * dx(i);
            try {
                Eigen::VectorXd Ft;
                eval(trial, Ft, nullptr);
                ok = Ft.norm() < (1.0 - 1e-4 * alpha) * n0;
            } catch (const ConeError&) {
            }
        }
        if (!ok) throw StagnationError("radial dual Newton stagnated");
        u = trial;
        sol.newton_iterations = it + 1;
    }
    eval(u, F, nullptr);
    if (F.lpNorm<Eigen::Infinity>() > std::max(tol, 1e-9)) {
        throw StagnationError("radial dual Newton did not converge (residual " +
                              std::to_string(F.lpNorm<Eigen::Infinity>()) + ")");
    }
    sol.u = u;
    sol.du.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto& rw = rows[static_cast<std::size_t>(i)];
        double du = 0.0;
        for (int s = 0; s < 3; ++s) du += rw.d1[static_cast<std::size_t>(s)] * u[static_cast<std::size_t>(rw.idx[static_cast<std::size_t>(s)])];
        sol.du[static_cast<std::size_t>(i)] = du;
    }
    return sol;
}

}  // namespace serrin
