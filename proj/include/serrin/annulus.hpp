#pragma once

#include "serrin/grid.hpp"
#include "serrin/problem.hpp"
#include "serrin/radial.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace serrin {

struct GridControls {
    int n_r = 48;
    int n_theta = 16;
    int n_phi = 32;
    double max_first_spacing = 0.02;
};

struct SolverControls {
    double newton_tol = 1e-10;     ///< max-norm of the residual
    int max_newton = 25;
    int max_halvings = 30;
    double dt_init = 0.25;
    double dt_min = 1e-3;
    double dt_max = 0.25;
    double dt_grow = 1.5;
    int easy_iterations = 4;       ///< grow dt only after a step this cheap
    double linear_rtol = 1e-9;
    std::size_t direct_limit = 100000;
    double bound_tol_rel = 1e-6;
    double min_R = 4.0;
};

/// Dual field u*_{R,t} at the nodes of a shell grid over B_R minus the closed unit ball.
struct AnnulusField {
    SphericalGrid grid;
    std::vector<double> u;
    double t = 0.0;
    int k = 0;
    double c = 0.0;
    AnisotropyVec aniso;  ///< target a (t = 1)

    double R() const { return grid.r_outer(); }
};

struct StepRecord {
    double t = 0.0;
    double dt = 0.0;
    bool accepted = false;
    int newton_iterations = 0;
    std::vector<double> residual_history;  ///< max-norm after each accepted Newton update
    double equation_residual = 0.0;
    double robin_residual = 0.0;
    double dirichlet_residual = 0.0;
    double lower_margin = 0.0;  ///< min(u - omega_lower_t)
    double upper_margin = 0.0;  ///< min(omega_upper_t - u)
    bool bounds_ok = false;
    double seconds = 0.0;
    std::string failure;
};

struct SolveReport {
    std::vector<StepRecord> steps;
    bool converged = false;
    double R = 0.0;
    double t0_residual = 0.0;
    double r1_estimate = 0.0;
    int total_newton = 0;
    double seconds = 0.0;
};

/// Per-row residual norms split by row type.
struct ResidualParts {
    double equation = 0.0;
    double robin = 0.0;
    double dirichlet = 0.0;
    double max() const { return std::max({equation, robin, dirichlet}); }
};

/// Discretization of the t-family on a fixed shell grid. Interior rows carry
/// F(D^2_h u) - rhs_t^{1/k} - tau_t with tau_t = F(D^2_h w) - F(D^2 w) for w = omega_lower_t, and
/// Robin rows subtract the matching one-sided truncation error, so that at t = 0 the subsolution
/// solves the discrete problem to rounding.
class AnnulusProblem {
public:
    AnnulusProblem(AnisotropyVec target, double c, SphericalGrid grid);

    void set_t(double t);
    double t() const { return t_; }
    const SphericalGrid& grid() const { return grid_; }
    const AnisotropyVec& target() const { return target_; }
    const AnisotropyVec& path_aniso() const { return path_; }
    const Subsolution& subsolution() const { return *sub_; }
    double c() const { return c_; }
    int k() const { return target_.k; }
    double rhs_root() const { return rhs_root_; }

    /// omega_lower_t, omega_upper_t and psi_t on the inner sphere at the current t.
    const std::vector<double>& lower() const { return lower_; }
    const std::vector<double>& upper() const { return upper_; }
    const std::vector<double>& psi() const { return psi_; }

    /// Throws ConeError naming the first node whose discrete Hessian is not positive definite.
    Eigen::VectorXd residual(const std::vector<double>& u, ResidualParts* parts = nullptr) const;
    Eigen::SparseMatrix<double> jacobian(const std::vector<double>& u) const;
    /// Smallest eigenvalue of D^2_h u over interior nodes.
    double min_hessian_eigenvalue(const std::vector<double>& u) const;

private:
    std::vector<double> subsolution_nodes(const Subsolution& s) const;

    AnisotropyVec target_;
    double c_;
    SphericalGrid grid_;
    double t_ = -1.0;
    AnisotropyVec path_;
    std::optional<Subsolution> sub_;
    double rhs_root_ = 0.0;
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<double> psi_;
    std::vector<double> robin_corr_;
    std::vector<double> eq_corr_;
};

struct NewtonResult {
    bool converged = false;
    int iterations = 0;
    std::vector<double> history;
    std::string failure;
};

/// Damped Newton with a convexity-preserving step cap and residual backtracking.
NewtonResult newton_solve(const AnnulusProblem& prob, std::vector<double>& u,
                          const SolverControls& ctl);

/// One Newton update; returns the max-norm of the step taken. Throws StagnationError.
double newton_step(const AnnulusProblem& prob, std::vector<double>& u, const SolverControls& ctl);

/// Solves J v = rhs with the direct or preconditioned iterative solver by size.
Eigen::VectorXd solve_linear(const Eigen::SparseMatrix<double>& J, const Eigen::VectorXd& rhs,
                             const SolverControls& ctl);

/// Samples psi_t on the inner sphere: omega_lower_t - d omega_lower_t / dn, in closed form.
std::vector<double> psi_t(const SphericalGrid& g, const AnisotropyVec& target, double c, double t);

/// Radius beyond which omega_upper - omega_lower drops below 1e-3 along the worst axis.
double r1_estimate(const AnisotropyVec& aniso, double c);

/// Continuation from t = 0 to t = 1 on B_R minus the unit ball. Throws AdmissibilityError when
/// c exceeds c_bar, DomainError when R is below ctl.min_R, ContinuationError on dt underflow.
std::pair<AnnulusField, SolveReport> continuation_solve(
    const ReducedProblem& prob, double R, const GridControls& grid, const SolverControls& ctl,
    const std::function<void(const AnnulusField&)>& on_accept = {});

struct ExtensionReport {
    std::vector<double> R;
    std::vector<double> discrepancy;  ///< between solutions i-1 and i on B_{R_{i-1}/2}
    bool monotone = true;
    std::string warning;
};

std::pair<std::vector<AnnulusField>, ExtensionReport> extend_R(
    const ReducedProblem& prob, const std::vector<double>& R_list, const GridControls& grid,
    const SolverControls& ctl, std::vector<SolveReport>* reports = nullptr,
    const std::function<void(const AnnulusField&)>& on_accept = {});

/// Max |u_a - u_b| over nodes of a with radius <= r_cap, evaluating b by interpolation.
double field_discrepancy(const AnnulusField& a, const AnnulusField& b, double r_cap);

struct AngularBound {
    double max_rotational = 0.0;  ///< max_{nodes, i<j} |(p_i d_j - p_j d_i) u|
    double bound = 0.0;           ///< 2 max|D psi_t| (1 - t) + max_{|p|=R} |T omega_lower| + margin
    bool holds = false;
};

/// Rotational derivatives T_ij = p_i d_j - p_j d_i of an arbitrary nodal field.
double max_rotational_derivative(const SphericalGrid& g, const std::vector<double>& u);
AngularBound angular_derivative_bound(const AnnulusField& field);

/// Radially symmetric dual solution (A = I, any d >= 3), 1-D finite differences in r.
struct RadialDualSolution {
    int d = 0;
    int k = 0;
    double c = 0.0;
    std::vector<double> r;
    std::vector<double> u;
    std::vector<double> du;
    int newton_iterations = 0;
};

/// corrected subtracts the subsolution's truncation error row by row, as the shell scheme does;
/// the plain scheme is only second-order accurate.
RadialDualSolution solve_radial_dual(int d, int k, double c, double R, int n_r,
                                     double max_first_spacing = 0.02, double tol = 1e-12,
                                     bool corrected = false);

}  // namespace serrin
