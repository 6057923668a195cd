#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace serrin {

/// Tensor grid in (r, theta, phi) over a spherical shell in R^3. theta_j = (j + 1/2) pi / n_theta
/// never hits a pole; phi_m = 2 pi m / n_phi is periodic. n_phi must be even so that a theta
/// stencil crossing a pole lands on the opposite meridian.
class SphericalGrid {
public:
    SphericalGrid() = default;

    /// Radii from r_in to r_out, geometric when the uniform spacing would exceed max_first_spacing.
    static SphericalGrid shell(double r_in, double r_out, int n_r, int n_theta, int n_phi,
                               double max_first_spacing = 0.02);
    static SphericalGrid with_radii(std::vector<double> radii, int n_theta, int n_phi);

    int n_r() const { return n_r_; }
    int n_theta() const { return n_theta_; }
    int n_phi() const { return n_phi_; }
    std::size_t size() const { return static_cast<std::size_t>(n_r_) * n_theta_ * n_phi_; }
    std::size_t index(int i, int j, int m) const {
        return (static_cast<std::size_t>(i) * n_theta_ + j) * n_phi_ + m;
    }
    std::size_t ring_index(int j, int m) const { return static_cast<std::size_t>(j) * n_phi_ + m; }

    const std::vector<double>& r() const { return r_; }
    double r(int i) const { return r_[static_cast<std::size_t>(i)]; }
    double theta(int j) const { return (j + 0.5) * dtheta_; }
    double phi(int m) const { return m * dphi_; }
    double dtheta() const { return dtheta_; }
    double dphi() const { return dphi_; }
    double sin_theta(int j) const { return sin_t_[static_cast<std::size_t>(j)]; }
    double cos_theta(int j) const { return cos_t_[static_cast<std::size_t>(j)]; }
    double r_inner() const { return r_.front(); }
    double r_outer() const { return r_.back(); }

    /// Largest radial spacing; the "grid scale" quoted by convergence studies.
    double grid_scale() const;

    Eigen::Vector3d unit(int j, int m) const;
    Eigen::Vector3d point(int i, int j, int m) const { return r(i) * unit(j, m); }
    /// Columns e_r, e_theta, e_phi at angular node (j, m).
    Eigen::Matrix3d frame(int j, int m) const;

    /// Resolves a theta index in [-n_theta, 2 n_theta) across the poles.
    std::pair<int, int> wrap(int j, int m) const;

    bool same_layout(const SphericalGrid& o) const;

private:
    void finish_angles();

    int n_r_ = 0;
    int n_theta_ = 0;
    int n_phi_ = 0;
    double dtheta_ = 0.0;
    double dphi_ = 0.0;
    std::vector<double> r_;
    std::vector<double> sin_t_;
    std::vector<double> cos_t_;
};

/// Partial derivatives in spherical coordinates, in the order used by Stencil weights.
enum Deriv : int { Dr = 0, Dt, Dp, Drr, Dtt, Dpp, Drt, Drp, Dtp, NumDerivs };

/// Finite-difference weights at one node: derivative q = sum_s w[q][s] u[nodes[s]].
/// Radial factors are 3-point (4-point for second derivatives at the two ends), angular factors
/// are centred, mixed ones are products.
struct Stencil {
    static constexpr int kMax = 28;
    int count = 0;
    std::array<std::size_t, kMax> nodes{};
    std::array<std::array<double, kMax>, NumDerivs> w{};

    std::array<double, NumDerivs> apply(std::span<const double> u) const;
};

void build_stencil(const SphericalGrid& g, int i, int j, int m, Stencil& out);

/// H_ab = sum_q coef[a][b][q] D_q in the orthonormal frame (e_r, e_theta, e_phi).
using HessianCoefficients = std::array<std::array<std::array<double, NumDerivs>, 3>, 3>;
HessianCoefficients frame_hessian_coefficients(double r, double sin_t, double cos_t);
Eigen::Matrix3d frame_hessian(const std::array<double, NumDerivs>& d,
                              const HessianCoefficients& c);

/// Cartesian gradient from (u_r, u_theta, u_phi).
Eigen::Vector3d cartesian_gradient(const SphericalGrid& g, int i, int j, int m,
                                   const std::array<double, NumDerivs>& d);

/// Lagrange weights on arbitrary abscissae for the first and second derivative at x0.
void fd_weights(double x0, std::span<const double> x, std::span<double> d1, std::span<double> d2);

/// Fejer's first rule on theta_j = (j + 1/2) pi / n: integrates f(theta) sin(theta) over [0, pi].
std::vector<double> fejer_weights(int n);

/// Integral over the unit sphere of samples on the angular grid (index ring_index(j, m)).
double sphere_integral(const SphericalGrid& g, std::span<const double> samples);

/// Tensor-cubic Lagrange interpolation of several nodal fields at one Cartesian point.
class GridInterpolator {
public:
    explicit GridInterpolator(const SphericalGrid& g) : g_(&g) {}

    /// False when the point lies outside [r_inner, r_outer] by more than a relative 1e-12, or by
    /// more than the extrapolation margin when one is set.
    bool locate(const Eigen::Vector3d& x);
    /// Allows radial extrapolation up to this fraction of the end cell on either side.
    void set_extrapolation(double cells) { extrap_ = cells; }
    double inner_limit() const;
    double outer_limit() const;
    double eval(std::span<const double> field) const;

private:
    const SphericalGrid* g_;
    std::array<std::size_t, 64> nodes_{};
    std::array<double, 64> weights_{};
    int count_ = 0;
    double extrap_ = 0.0;
};

}  // namespace serrin
