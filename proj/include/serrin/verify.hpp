#pragma once

#include "serrin/annulus.hpp"
#include "serrin/legendre.hpp"

#include <json.hpp>

#include <array>
#include <span>
#include <string>
#include <vector>

namespace serrin {

/// Primal samples pulled back through the dual gradient map: x = Du*(p), u(x) = p.x - u*(p),
/// Du(x) = p, D^2u(x) = (D^2u*(p))^{-1}. Indexed like the dual grid.
struct PrimalSamples {
    SphericalGrid grid;
    std::vector<Eigen::Vector3d> x;
    std::vector<double> u;
    std::vector<Eigen::Matrix3d> hessian;
    double outer_reach = 0.0;  ///< min |x| over the outer dual sphere
};

struct FreeBoundary {
    std::vector<Eigen::Vector3d> vertices;  ///< ring vertices (ring_index order), then the two poles
    std::vector<std::array<int, 3>> triangles;
    std::vector<double> facet_area;
    std::vector<Eigen::Vector3d> facet_normal;  ///< outward unit normals
    std::vector<double> u_vertex;               ///< u on the ring vertices
    std::vector<double> grad_norm;              ///< |Du| by the chain rule on the samples, ring vertices
    int euler = 0;
    bool closed = false;
    double area = 0.0;    ///< facet sum
    double volume = 0.0;  ///< divergence theorem over the facets
    double max_abs_u = 0.0;
    double max_grad_dev = 0.0;  ///< max ||Du| - 1|
    double radius_min = 0.0;
    double radius_max = 0.0;
    double min_support = 0.0;        ///< min x.nu over ring vertices
    double min_support_hessian = 0.0;  ///< min eigenvalue of the tangential block W

    double radius_ratio() const { return radius_max / radius_min; }
};

struct Recovery {
    SampledConvexFn dual;
    PrimalSamples primal;
    FreeBoundary boundary;
};

/// Differentiates the dual field and pulls the primal back. Throws TopologyError when the
/// boundary mesh is not a closed sphere, ConvexityError when D^2u* is singular somewhere.
Recovery recover_primal(const AnnulusField& field);
SampledConvexFn dual_samples(const AnnulusField& field);
PrimalSamples pull_back(const SampledConvexFn& dual);
FreeBoundary extract_free_boundary(const SampledConvexFn& dual, const PrimalSamples& primal);

/// max over interior samples of |sigma_k(D^2 u) - C(3, k)|, using the analytic inverse of the
/// finite-difference dual Hessian.
double equation_residual_primal(const PrimalSamples& primal, int k);

struct DecayFit {
    double beta = 0.0;
    double C = 0.0;
    double residual = 0.0;  ///< rms of the log-log regression
    double r_lo = 0.0;
    double r_hi = 0.0;
    int samples = 0;
    bool degenerate = false;  ///< deviation at the rounding floor; beta meaningless
};

/// Least-squares fit of log|g| = log C - beta log r over samples with r in [r_lo, r_hi]. The window
/// must span a decade, or half of one with allow_half. Throws WindowError.
DecayFit decay_fit(std::span<const double> r, std::span<const double> g, double r_lo, double r_hi,
                   bool allow_half = false);

/// Per dual shell: mean |x| and max |u - (1/2) x.A x - c| with A = diag(1/a), shells below
/// keep_fraction of the annulus only.
std::pair<std::vector<double>, std::vector<double>> primal_deviation_envelope(
    const PrimalSamples& primal, std::span<const double> a, double c, double keep_fraction = 0.8);

/// Per dual shell: radius and max |u* - (1/2) sum a_i p_i^2 + c|.
std::pair<std::vector<double>, std::vector<double>> dual_deviation_envelope(
    const SampledConvexFn& dual, std::span<const double> a, double c, double keep_fraction = 0.8);

/// Per dual shell: mean |x| and max spectral norm of D^2u - diag(1/a).
std::pair<std::vector<double>, std::vector<double>> hessian_deviation_envelope(
    const PrimalSamples& primal, std::span<const double> a, double keep_fraction = 0.8);

struct IdentityEntry {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct IdentityReport {
    std::vector<IdentityEntry> entries;
    double min_x_dot_nu = 0.0;
    double enclosed_volume = 0.0;  ///< (1/3) int u* det W
    double boundary_area = 0.0;    ///< int det W

    const IdentityEntry* find(const std::string& name) const;
    nlohmann::json to_json() const;
};

struct IdentityTolerances {
    double curvature = 1e-3;  ///< identity (i)
    double area = 1e-3;       ///< identity (ii)
    double phi = 1e-6;        ///< (iii): phi >= -tol
    double maclaurin = 1e-8;  ///< (iv): Laplacian - 3 (sigma_k / C(3,k))^{1/k} >= -tol
};

/// Surface integrals run over the unit sphere in the normal parametrization: W is the tangential
/// block of D^2u* at |p| = 1, dA = det W, H_{k-1} dA = sigma_{3-k}(W).
IdentityReport rigidity_identities(const SampledConvexFn& dual, int k, double c,
                                   const IdentityTolerances& tol = {});

}  // namespace serrin
