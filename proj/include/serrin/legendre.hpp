#pragma once

#include "serrin/grid.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace serrin {

/// A strictly convex function sampled on a shell grid, with nodal gradients and Hessians
/// recovered by the spherical finite differences of grid.hpp.
struct SampledConvexFn {
    SphericalGrid grid;
    std::vector<double> value;
    std::vector<Eigen::Vector3d> gradient;
    std::vector<Eigen::Matrix3d> hessian;  ///< Cartesian components
    double convexity_certificate = 0.0;    ///< min eigenvalue of the nodal Hessians
    /// For transforms: the primal point x(p) matched to each node p.
    std::vector<Eigen::Vector3d> matched;

    /// Fills gradient, hessian and the certificate from value.
    void differentiate();
    /// Samples f on grid and differentiates.
    static SampledConvexFn sample(const SphericalGrid& grid,
                                  const std::function<double(const Eigen::Vector3d&)>& f);
};

struct TransformOptions {
    int max_newton = 40;
    double tol = 1e-13;     ///< on |Du(x) - p|, relative to |p|
    int scan_stride = 2;    ///< node stride of the fallback supremum scan
    /// Matches may sit this fraction of the end radial cell outside the sampled shell, so that
    /// image points on the boundary survive the truncation error of the sampled gradient.
    double boundary_cells = 0.5;
};

/// u*(p) = p.x(p) - u(x(p)) with Du(x(p)) = p, on the nodes of targets. Throws ImageError when a
/// target is not reached, ConvexityError when f fails its convexity certificate.
SampledConvexFn legendre_transform(const SampledConvexFn& f, const SphericalGrid& targets,
                                   const TransformOptions& opt = {});

struct GradientImage {
    std::vector<Eigen::Vector3d> inner;  ///< Df on the inner sphere, ring order
    double inner_radius_min = 0.0;
    double inner_radius_max = 0.0;
    double outer_reach = 0.0;            ///< min |Df| on the outer sphere
};

GradientImage gradient_image_boundary(const SampledConvexFn& f);

/// max over interior target nodes of the spectral norm of D^2 u*(p) - (D^2 u(x(p)))^{-1}.
double hessian_inverse_check(const SampledConvexFn& f, const SampledConvexFn& fstar);

/// max |u* - du*/dn| on the inner sphere, with the one-sided normal difference.
double robin_check(const SampledConvexFn& fstar);

/// max over interior nodes of |(sigma_d / sigma_{d-k})(D^2 u*) - target|.
double quotient_residual(const SampledConvexFn& fstar, int k, double target);

/// max over interior nodes of |sigma_k(D^2 u) - target|.
double sigma_residual(const SampledConvexFn& f, int k, double target);

/// min over node pairs (x, p) of u(x) + u*(p) - p.x, and the max gap over matched pairs.
struct FenchelYoung {
    double min_gap = 0.0;
    double matched_gap = 0.0;
};
FenchelYoung fenchel_young(const SampledConvexFn& f, const SampledConvexFn& fstar, int stride = 3);

}  // namespace serrin
