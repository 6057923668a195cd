#pragma once

#include "serrin/errors.hpp"
#include "serrin/symfun.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace serrin {

/// Dual quadratic coefficients a = (a_1, ..., a_d) together with the exponents derived from them.
struct AnisotropyVec {
    std::vector<double> a;
    int k = 0;
    int d = 0;
    int l = 0;               ///< d - k
    double eta = 0.0;        ///< min_i sqrt(a_i)
    double t_lower = 0.0;
    double dstar = 0.0;
    bool admissible = false; ///< sigma_k(1/a) == C(d,k) to relative 1e-10, recomputed here

    static AnisotropyVec make(std::vector<double> a, int k);

    double a_max() const;
    double a_min() const;
    /// Right-hand side sigma_d(a) / sigma_{d-k}(a) of the dual Hessian-quotient equation.
    double quotient_rhs() const;
    /// Componentwise a(t) = t a + (1 - t)(1, ..., 1).
    AnisotropyVec along_path(double t) const;
};

/// min_i sigma_{l-1;i}(a) a_i / sigma_l(a); zero when l == 0.
double t_lower(std::span<const double> a, int l);

/// d_k^*(a) = (d - l) / (1 - t_lower_l(a)).
double dstar(std::span<const double> a, int k);

/// The same exponent written through lambda = 1/a: k sigma_k(lambda) / max_i lambda_i sigma_{k-1;i}(lambda).
double dstar_from_inverse(std::span<const double> a, int k);

/// xi(h) = h^{d*} - h^{d* t_lower}.
double xi_eval(double h, const AnisotropyVec& aniso);
double xi_derivative(double h, const AnisotropyVec& aniso);
/// The root h >= 1 of xi(h) = y.
double xi_inverse(double y, const AnisotropyVec& aniso);

/// Value and gradient of a function at one point.
struct ValueGrad {
    double value = 0.0;
    std::vector<double> grad;
};

/// Radially-in-the-a-metric symmetric subsolution built from xi^{-1}; caches mu(C1).
class Subsolution {
public:
    Subsolution(AnisotropyVec aniso, double C1);

    const AnisotropyVec& aniso() const { return aniso_; }
    double C1() const { return C1_; }
    double mu() const { return mu_; }

    /// h(r) = xi^{-1}(C1 r^{-d*}).
    double h(double r) const;
    /// h'(r) from the defining ODE.
    double dh(double r) const;
    /// Phi(r) with omega(p) = Phi(sqrt(sum a_i p_i^2)).
    double profile(double r) const;
    /// Phi evaluated at many radii at once by accumulating panel integrals between sorted radii.
    std::vector<double> profile_batch(std::span<const double> radii) const;
    /// int_r^inf s (h(s) - 1) ds, the gap to the asymptotic quadratic.
    double tail(double r) const;

    double metric_radius(std::span<const double> p) const;
    ValueGrad eval(std::span<const double> p) const;
    Eigen::MatrixXd hessian(std::span<const double> p) const;

private:
    AnisotropyVec aniso_;
    double C1_ = 0.0;
    double mu_ = 0.0;
};

/// mu(C1): asymptotic additive constant of the subsolution.
double mu_of_C1(double C1, const AnisotropyVec& aniso);

/// The unique C1 >= 0 with mu(C1) = -c.
double solve_C1_for_c(double c, const AnisotropyVec& aniso);

/// Subsolution with mu(C1) = -c.
Subsolution make_subsolution(const AnisotropyVec& aniso, double c);

ValueGrad subsolution_eval(std::span<const double> p, const Subsolution& params);

/// omega_bar(p) = 1/2 sum a_i p_i^2 - c, needing -c >= max_i a_i / 2.
ValueGrad supersolution_eval(std::span<const double> p, const AnisotropyVec& aniso, double c);

/// Radial primal solution u(r) = int_{r0}^r s (1 + C s^{-d})^{1/k} ds sampled on a grid.
struct RadialProfile {
    double r0 = 0.0;
    int k = 0;
    int d = 0;
    double C = 0.0;    ///< r0^{d-k} - r0^d
    double mu = 0.0;   ///< u(r) - r^2/2 -> mu
    double r2 = 0.0;   ///< strict-convexity threshold ((d-k)/d)^{1/k}
    bool convex_branch = true;
    std::vector<double> r;
    std::vector<double> u;
    std::vector<double> du;        ///< u'(r) = r h
    std::vector<double> h;         ///< u'/r
    std::vector<double> dh;        ///< h'(r), differentiated in closed form
    std::vector<double> d2u;       ///< u'' = h + r h'
    std::vector<double> deviation; ///< u - r^2/2 - mu, computed directly from the tail integral
};

enum class Spacing { Uniform, Geometric };

double convexity_threshold(int k, int d);

/// Samples the radial solution. With allow_k_convex the r0 <= r2 branch is accepted.
RadialProfile radial_primal(double r0, int k, int d, double rmax, int npts,
                            Spacing spacing = Spacing::Uniform, bool allow_k_convex = false);

/// h(r) = (1 + C r^{-d})^{1/k} for the radial solution with inner radius r0.
double radial_h(double r, double r0, int k, int d);

/// mu(r0) = -r0^2/2 + int_{r0}^inf s((1 + C s^{-d})^{1/k} - 1) ds.
double mu_of_r0(double r0, int k, int d, bool allow_k_convex = false);

/// The inner radius r0 > r2 with mu(r0) = mu_target (mu is decreasing there).
double r0_for_mu(double mu_target, int k, int d);

/// Sharp threshold c_* for the isotropic problem.
double cstar(int k, int d, std::span<const double> b);
/// Supremum of mu over all r0 > 0 (k-convex radial solutions), k < d.
double chat(int k, int d);
/// (|b|^2 lambda_min(A) - lambda_max(A)) / (2 lambda_min(A) lambda_max(A)).
double cbar(const SymMatrix& A, std::span<const double> b);

}  // namespace serrin
