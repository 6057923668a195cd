#include "serrin/grid.hpp"

#include "serrin/errors.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace serrin {

namespace {

constexpr double kPi = std::numbers::pi;

void check_angles(int n_theta, int n_phi) {
    if (n_theta < 2) throw DomainError("n_theta must be at least 2");
    if (n_phi < 4 || n_phi % 2 != 0) throw DomainError("n_phi must be even and at least 4");
}

}  // namespace

SphericalGrid SphericalGrid::shell(double r_in, double r_out, int n_r, int n_theta, int n_phi,
                                   double max_first_spacing) {
    if (!(r_in > 0.0) || !(r_out > r_in)) throw DomainError("shell needs 0 < r_in < r_out");
    if (n_r < 4) throw DomainError("n_r must be at least 4");
    const double span = r_out - r_in;
    const int cells = n_r - 1;
    const double h0 = std::min(max_first_spacing, span / cells);
    std::vector<double> r(static_cast<std::size_t>(n_r));
    double q = 1.0;
    if (span / cells > h0 * (1.0 + 1e-14)) {
        // h0 (q^cells - 1) / (q - 1) = span
        auto f = [&](double x) { return h0 * std::expm1(cells * std::log(x)) / (x - 1.0) - span; };
        double hi = 2.0;
        while (f(hi) < 0.0) hi *= 2.0;
        std::uintmax_t iters = 200;
        auto tol = boost::math::tools::eps_tolerance<double>(50);
        const auto br = boost::math::tools::toms748_solve(f, 1.0 + 1e-15, hi, tol, iters);
        q = 0.5 * (br.first + br.second);
    }
    double step = h0;
    r[0] = r_in;
    for (int i = 1; i < n_r; ++i) {
        r[static_cast<std::size_t>(i)] = r[static_cast<std::size_t>(i - 1)] + step;
        step *= q;
    }
    r.back() = r_out;
    return with_radii(std::move(r), n_theta, n_phi);
}

SphericalGrid SphericalGrid::with_radii(std::vector<double> radii, int n_theta, int n_phi) {
    check_angles(n_theta, n_phi);
    if (radii.size() < 4) throw DomainError("need at least 4 radial nodes");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (!(radii[i] > radii[i - 1])) throw DomainError("radii must increase strictly");
    if (!(radii.front() > 0.0)) throw DomainError("radii must be positive");
    SphericalGrid g;
    g.n_r_ = static_cast<int>(radii.size());
    g.n_theta_ = n_theta;
    g.n_phi_ = n_phi;
    g.r_ = std::move(radii);
    g.finish_angles();
    return g;
}

void SphericalGrid::finish_angles() {
    dtheta_ = kPi / n_theta_;
    dphi_ = 2.0 * kPi / n_phi_;
    sin_t_.resize(static_cast<std::size_t>(n_theta_));
    cos_t_.resize(static_cast<std::size_t>(n_theta_));
    for (int j = 0; j < n_theta_; ++j) {
        sin_t_[static_cast<std::size_t>(j)] = std::sin(theta(j));
        cos_t_[static_cast<std::size_t>(j)] = std::cos(theta(j));
    }
}

double SphericalGrid::grid_scale() const {
    double h = 0.0;
    for (std::size_t i = 1; i < r_.size(); ++i) h = std::max(h, r_[i] - r_[i - 1]);
    return h;
}

Eigen::Vector3d SphericalGrid::unit(int j, int m) const {
    const double st = sin_theta(j), ct = cos_theta(j);
    const double ph = phi(m);
    return {st * std::cos(ph), st * std::sin(ph), ct};
}

Eigen::Matrix3d SphericalGrid::frame(int j, int m) const {
    const double st = sin_theta(j), ct = cos_theta(j);
    const double cp = std::cos(phi(m)), sp = std::sin(phi(m));
    Eigen::Matrix3d e;
    e.col(0) << st * cp, st * sp, ct;
    e.col(1) << ct * cp, ct * sp, -st;
    e.col(2) << -sp, cp, 0.0;
    return e;
}

std::pair<int, int> SphericalGrid::wrap(int j, int m) const {
    int mm = ((m % n_phi_) + n_phi_) % n_phi_;
    if (j < 0) {
        j = -1 - j;
        mm = (mm + n_phi_ / 2) % n_phi_;
    } else if (j >= n_theta_) {
        j = 2 * n_theta_ - 1 - j;
        mm = (mm + n_phi_ / 2) % n_phi_;
    }
    return {j, mm};
}

bool SphericalGrid::same_layout(const SphericalGrid& o) const {
    return n_r_ == o.n_r_ && n_theta_ == o.n_theta_ && n_phi_ == o.n_phi_ && r_ == o.r_;
}

// ---- finite differences -----------------------------------------------------------------

void fd_weights(double x0, std::span<const double> x, std::span<double> d1, std::span<double> d2) {
    // Fornberg's recursion for derivative orders 0..2
    const std::size_t n = x.size();
    std::vector<std::array<double, 3>> c(n, {0.0, 0.0, 0.0});
    double c1 = 1.0;
    double c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t mn = std::min<std::size_t>(i, 2);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (std::size_t k = mn; k >= 1; --k)
                    c[i][k] = c1 * (static_cast<double>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (std::size_t k = mn; k >= 1; --k)
                c[j][k] = (c4 * c[j][k] - static_cast<double>(k) * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    for (std::size_t i = 0; i < n; ++i) {
        d1[i] = c[i][1];
        d2[i] = c[i][2];
    }
}

std::array<double, NumDerivs> Stencil::apply(std::span<const double> u) const {
    std::array<double, NumDerivs> d{};
    for (int q = 0; q < NumDerivs; ++q) {
        double s = 0.0;
        for (int k = 0; k < count; ++k) s += w[q][k] * u[nodes[k]];
        d[q] = s;
    }
    return d;
}

void build_stencil(const SphericalGrid& g, int i, int j, int m, Stencil& out) {
    out.count = 0;
    for (auto& row : out.w) row.fill(0.0);

    // radial abscissae: centred triple inside, one-sided at the ends
    const int nr = g.n_r();
    std::array<int, 4> ri{};
    int nrad = 3;
    if (i == 0) {
        ri = {0, 1, 2, 3};
        nrad = 4;
    } else if (i == nr - 1) {
        ri = {nr - 1, nr - 2, nr - 3, nr - 4};
        nrad = 4;
    } else {
        ri = {i - 1, i, i + 1, 0};
    }
    std::array<double, 4> xr{}, w1{}, w2{}, tmp{};
    for (int s = 0; s < nrad; ++s) xr[static_cast<std::size_t>(s)] = g.r(ri[static_cast<std::size_t>(s)]);
    fd_weights(g.r(i), std::span<const double>(xr.data(), static_cast<std::size_t>(nrad)),
               std::span<double>(tmp.data(), static_cast<std::size_t>(nrad)),
               std::span<double>(w2.data(), static_cast<std::size_t>(nrad)));
    // first derivatives stay 3-point so the one-sided Robin difference is the standard one
    fd_weights(g.r(i), std::span<const double>(xr.data(), 3), std::span<double>(w1.data(), 3),
               std::span<double>(tmp.data(), 3));
    if (nrad == 4) w1[3] = 0.0;

    const double dt = g.dtheta(), dp = g.dphi();
    auto add = [&](int ii, int jj, int mm) {
        const auto [jw, mw] = g.wrap(jj, mm);
        out.nodes[static_cast<std::size_t>(out.count)] = g.index(ii, jw, mw);
        return out.count++;
    };

    for (int s = 0; s < nrad; ++s) {
        const int slot = add(ri[static_cast<std::size_t>(s)], j, m);
        out.w[Dr][slot] = w1[static_cast<std::size_t>(s)];
        out.w[Drr][slot] = w2[static_cast<std::size_t>(s)];
    }
    // the centre node is in the radial list; angular centre weights go there
    const int centre = i == 0 ? 0 : (i == nr - 1 ? 0 : 1);
    out.w[Dtt][centre] += -2.0 / (dt * dt);
    out.w[Dpp][centre] += -2.0 / (dp * dp);
    for (int sgn : {-1, 1}) {
        int s = add(i, j + sgn, m);
        out.w[Dt][s] = sgn / (2.0 * dt);
        out.w[Dtt][s] = 1.0 / (dt * dt);
        s = add(i, j, m + sgn);
        out.w[Dp][s] = sgn / (2.0 * dp);
        out.w[Dpp][s] = 1.0 / (dp * dp);
    }
    for (int s = 0; s < nrad; ++s) {
        const double wr = w1[static_cast<std::size_t>(s)];
        if (wr == 0.0) continue;
        const int ii = ri[static_cast<std::size_t>(s)];
        for (int sgn : {-1, 1}) {
            int slot = add(ii, j + sgn, m);
            out.w[Drt][slot] = wr * sgn / (2.0 * dt);
            slot = add(ii, j, m + sgn);
            out.w[Drp][slot] = wr * sgn / (2.0 * dp);
        }
    }
    for (int st : {-1, 1})
        for (int sp : {-1, 1}) {
            const int slot = add(i, j + st, m + sp);
            out.w[Dtp][slot] = st * sp / (4.0 * dt * dp);
        }
}

HessianCoefficients frame_hessian_coefficients(double r, double s, double c) {
    HessianCoefficients h{};
    const double r2 = r * r;
    h[0][0][Drr] = 1.0;
    h[0][1][Drt] = 1.0 / r;
    h[0][1][Dt] = -1.0 / r2;
    h[0][2][Drp] = 1.0 / (r * s);
    h[0][2][Dp] = -1.0 / (r2 * s);
    h[1][1][Dtt] = 1.0 / r2;
    h[1][1][Dr] = 1.0 / r;
    h[1][2][Dtp] = 1.0 / (r2 * s);
    h[1][2][Dp] = -c / (r2 * s * s);
    h[2][2][Dpp] = 1.0 / (r2 * s * s);
    h[2][2][Dr] = 1.0 / r;
    h[2][2][Dt] = c / (r2 * s);
    h[1][0] = h[0][1];
    h[2][0] = h[0][2];
    h[2][1] = h[1][2];
    return h;
}

Eigen::Matrix3d frame_hessian(const std::array<double, NumDerivs>& d, const HessianCoefficients& c) {
    Eigen::Matrix3d h;
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) {
            double s = 0.0;
            for (int q = 0; q < NumDerivs; ++q) s += c[a][b][q] * d[q];
            h(a, b) = s;
            h(b, a) = s;
        }
    return h;
}

Eigen::Vector3d cartesian_gradient(const SphericalGrid& g, int i, int j, int m,
                                   const std::array<double, NumDerivs>& d) {
    const double r = g.r(i);
    const Eigen::Vector3d local(d[Dr], d[Dt] / r, d[Dp] / (r * g.sin_theta(j)));
    return g.frame(j, m) * local;
}

// ---- quadrature --------------------------------------------------------------------------

std::vector<double> fejer_weights(int n) {
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const double th = (j + 0.5) * kPi / n;
        double s = 0.0;
        for (int m = 1; m <= n / 2; ++m) s += std::cos(2.0 * m * th) / (4.0 * m * m - 1.0);
        w[static_cast<std::size_t>(j)] = 2.0 / n * (1.0 - 2.0 * s);
    }
    return w;
}

double sphere_integral(const SphericalGrid& g, std::span<const double> samples) {
    if (samples.size() != static_cast<std::size_t>(g.n_theta()) * g.n_phi()) {
        throw DomainError("sphere_integral: sample count does not match the angular grid");
    }
    const auto w = fejer_weights(g.n_theta());
    double total = 0.0;
    for (int j = 0; j < g.n_theta(); ++j) {
        double ring = 0.0;
        for (int m = 0; m < g.n_phi(); ++m) ring += samples[g.ring_index(j, m)];
        total += w[static_cast<std::size_t>(j)] * ring;
    }
    return total * g.dphi();
}

// ---- interpolation -----------------------------------------------------------------------

namespace {

void lagrange(double x, const double* nodes, int n, double* out) {
    for (int a = 0; a < n; ++a) {
        double l = 1.0;
        for (int b = 0; b < n; ++b)
            if (b != a) l *= (x - nodes[b]) / (nodes[a] - nodes[b]);
        out[a] = l;
    }
}

}  // namespace

double GridInterpolator::inner_limit() const {
    const auto& g = *g_;
    return g.r_inner() - extrap_ * (g.r(1) - g.r(0));
}

double GridInterpolator::outer_limit() const {
    const auto& g = *g_;
    return g.r_outer() + extrap_ * (g.r(g.n_r() - 1) - g.r(g.n_r() - 2));
}

bool GridInterpolator::locate(const Eigen::Vector3d& x) {
    const auto& g = *g_;
    const double r = x.norm();
    if (r < inner_limit() * (1.0 - 1e-12) || r > outer_limit() * (1.0 + 1e-12)) return false;
    double th = r > 0.0 ? std::acos(std::clamp(x.z() / r, -1.0, 1.0)) : 0.0;
    double ph = std::atan2(x.y(), x.x());
    if (ph < 0.0) ph += 2.0 * kPi;

    const int nr = g.n_r();
    const auto it = std::upper_bound(g.r().begin(), g.r().end(), r);
    int cell = static_cast<int>(it - g.r().begin()) - 1;
    cell = std::clamp(cell, 0, nr - 2);
    const int rs = std::clamp(cell - 1, 0, nr - 4);
    double rn[4], wr[4];
    for (int a = 0; a < 4; ++a) rn[a] = g.r(rs + a);
    lagrange(r, rn, 4, wr);

    const int j0 = static_cast<int>(std::floor(th / g.dtheta() - 0.5)) - 1;
    double tn[4], wt[4];
    for (int a = 0; a < 4; ++a) tn[a] = (j0 + a + 0.5) * g.dtheta();
    lagrange(th, tn, 4, wt);

    const int m0 = static_cast<int>(std::floor(ph / g.dphi())) - 1;
    double pn[4], wp[4];
    for (int a = 0; a < 4; ++a) pn[a] = (m0 + a) * g.dphi();
    lagrange(ph, pn, 4, wp);

    count_ = 0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c) {
                const auto [jj, mm] = g.wrap(j0 + b, m0 + c);
                nodes_[static_cast<std::size_t>(count_)] = g.index(rs + a, jj, mm);
                weights_[static_cast<std::size_t>(count_)] = wr[a] * wt[b] * wp[c];
                ++count_;
            }
    return true;
}

double GridInterpolator::eval(std::span<const double> field) const {
    double s = 0.0;
    for (int k = 0; k < count_; ++k)
        s += weights_[static_cast<std::size_t>(k)] * field[nodes_[static_cast<std::size_t>(k)]];
    return s;
}

}  // namespace serrin
