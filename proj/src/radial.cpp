#include "serrin/radial.hpp"

#include "serrin/quadrature.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace serrin {

namespace {

constexpr double kTailSmall = 1e-6;

std::vector<double> reciprocal(std::span<const double> a) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = 1.0 / a[i];
    return out;
}

void check_positive(std::span<const double> a) {
    if (a.size() < 2) throw DomainError("anisotropy vector needs dimension >= 2");
    for (double v : a)
        if (!(v > 0.0)) throw DomainError("anisotropy coefficients must be positive");
}

// Monotone root of f on [lo, hi] (f(lo) and f(hi) of opposite sign), to relative width rtol.
template <class F>
double bracketed_root(F f, double lo, double hi, double rtol = 1e-15) {
    std::uintmax_t iters = 200;
    auto tol = [rtol](double x, double y) { return std::abs(x - y) <= rtol * std::max(std::abs(x), std::abs(y)) + 1e-300; };
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, tol, iters);
    return 0.5 * (r.first + r.second);
}

// (1 + z)^{1/k} - 1 without cancellation.
double root_minus_one(double z, int k) { return std::expm1(std::log1p(z) / k); }

// int_from^inf s ((1 + C s^{-d})^{1/k} - 1) ds, quadrature up to a cut then the binomial series.
double radial_tail(double C, int k, int d, double from) {
    if (C == 0.0) return 0.0;
    const double rc = std::max({1e3, 10.0 * from, std::pow(std::abs(C) / 1e-4, 1.0 / d)});
    auto f = [C, k, d](double s) { return s * root_minus_one(C * std::pow(s, -d), k); };
    double sum = quad::integrate_geometric(f, from, rc);
    // sum_n binom(1/k, n) C^n rc^{2 - n d} / (n d - 2)
    const double alpha = 1.0 / k;
    double coef = 1.0;
    for (int n = 1; n < 60; ++n) {
        coef *= (alpha - (n - 1)) / n;
        const double term = coef * std::pow(C, n) * std::pow(rc, 2.0 - n * d) / (n * d - 2.0);
        sum += term;
        if (std::abs(term) < 1e-20) break;
    }
    return sum;
}

}  // namespace

double t_lower(std::span<const double> a, int l) {
    check_positive(a);
    const int d = static_cast<int>(a.size());
    if (l < 0 || l > d - 1) throw DomainError("t_lower needs 0 <= l <= d-1");
    if (l == 0) return 0.0;
    const double sl = sigma_k(a, l);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.size(); ++i)
        best = std::min(best, sigma_k_reduced(a, l - 1, i) * a[i] / sl);
    return best;
}

double dstar(std::span<const double> a, int k) {
    const int d = static_cast<int>(a.size());
    if (k < 1 || k > d) throw DomainError("dstar needs 1 <= k <= d");
    return static_cast<double>(k) / (1.0 - t_lower(a, d - k));
}

double dstar_from_inverse(std::span<const double> a, int k) {
    check_positive(a);
    const int d = static_cast<int>(a.size());
    if (k < 1 || k > d) throw DomainError("dstar needs 1 <= k <= d");
    const auto lam = reciprocal(a);
    double worst = 0.0;
    for (std::size_t i = 0; i < lam.size(); ++i)
        worst = std::max(worst, lam[i] * sigma_k_reduced(lam, k - 1, i));
    return k * sigma_k(lam, k) / worst;
}

AnisotropyVec AnisotropyVec::make(std::vector<double> a, int k) {
    check_positive(a);
    AnisotropyVec v;
    v.d = static_cast<int>(a.size());
    if (k < 1 || k > v.d) throw DomainError("order k must satisfy 1 <= k <= d");
    v.k = k;
    v.l = v.d - k;
    v.a = std::move(a);
    v.eta = std::sqrt(*std::min_element(v.a.begin(), v.a.end()));
    v.t_lower = serrin::t_lower(v.a, v.l);
    v.dstar = k / (1.0 - v.t_lower);
    const double target = binomial(v.d, k);
    v.admissible = std::abs(sigma_k(reciprocal(v.a), k) - target) <= 1e-10 * target;
    return v;
}

double AnisotropyVec::a_max() const { return *std::max_element(a.begin(), a.end()); }
double AnisotropyVec::a_min() const { return *std::min_element(a.begin(), a.end()); }

double AnisotropyVec::quotient_rhs() const { return sigma_k(a, d) / sigma_k(a, l); }

AnisotropyVec AnisotropyVec::along_path(double t) const {
    std::vector<double> at(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) at[i] = t * a[i] + (1.0 - t);
    return make(std::move(at), k);
}

double xi_eval(double h, const AnisotropyVec& aniso) {
    return std::pow(h, aniso.dstar) - std::pow(h, aniso.dstar * aniso.t_lower);
}

double xi_derivative(double h, const AnisotropyVec& aniso) {
    const double a = aniso.dstar;
    const double b = aniso.dstar * aniso.t_lower;
    return a * std::pow(h, a - 1.0) - (b == 0.0 ? 0.0 : b * std::pow(h, b - 1.0));
}

namespace {

// epsilon = xi^{-1}(y) - 1, solved in the shifted variable to keep precision for small y.
double xi_inverse_minus_one(double y, const AnisotropyVec& aniso) {
    if (y < 0.0) throw DomainError("xi^{-1} needs y >= 0");
    if (y == 0.0) return 0.0;
    const double a = aniso.dstar;
    const double b = aniso.dstar * aniso.t_lower;
    auto g = [a, b, y](double e) {
        const double lg = std::log1p(e);
        return std::expm1(a * lg) - std::expm1(b * lg) - y;
    };
    auto dg = [a, b](double e) {
        return a * std::pow(1.0 + e, a - 1.0) - (b == 0.0 ? 0.0 : b * std::pow(1.0 + e, b - 1.0));
    };
    double lo = 0.0;
    double hi = std::max(1.0, std::pow(1.0 + y, 1.0 / a));
    while (g(hi) < 0.0) hi *= 2.0;
    double e = y < 1.0 ? std::min(y / aniso.k, hi) : std::pow(y, 1.0 / a) - 1.0 + 1e-3;
    e = std::clamp(e, lo, hi);
    for (int it = 0; it < 200; ++it) {
        const double ge = g(e);
        if (ge == 0.0) return e;
        if (ge < 0.0) lo = e; else hi = e;
        double next = e - ge / dg(e);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - e) <= 1e-16 * (1.0 + e) || hi - lo <= 1e-16 * (1.0 + e)) return next;
        e = next;
    }
    return e;
}

}  // namespace

double xi_inverse(double y, const AnisotropyVec& aniso) {
    return 1.0 + xi_inverse_minus_one(y, aniso);
}

// ---- Subsolution -------------------------------------------------------------------------

namespace {

double sub_tail_integrand(double s, double C1, const AnisotropyVec& an) {
    return s * xi_inverse_minus_one(C1 * std::pow(s, -an.dstar), an);
}

// int_from^inf s (xi^{-1}(C1 s^{-d*}) - 1) ds
double sub_tail(double from, double C1, const AnisotropyVec& an) {
    if (C1 == 0.0) return 0.0;
    if (!(an.dstar > 2.0)) {
        throw DecayConditionError("subsolution tail diverges: d_k^*(a) = " +
                                  std::to_string(an.dstar) + " <= 2");
    }
    const double ds = an.dstar;
    const double rc = std::max({1e3, 10.0 * from, std::pow(C1 / kTailSmall, 1.0 / ds)});
    double sum = quad::integrate_geometric(
        [C1, &an](double s) { return sub_tail_integrand(s, C1, an); }, from, rc);
    // xi(1 + e) = k e + q e^2 + ...  =>  e = y/k - q y^2 / k^3 + O(y^3)
    const double a = ds;
    const double b = ds * an.t_lower;
    const double q = 0.5 * (a * (a - 1.0) - b * (b - 1.0));
    const double k = an.k;
    sum += C1 / k * std::pow(rc, 2.0 - ds) / (ds - 2.0);
    sum -= q * C1 * C1 / (k * k * k) * std::pow(rc, 2.0 - 2.0 * ds) / (2.0 * ds - 2.0);
    return sum;
}

}  // namespace

Subsolution::Subsolution(AnisotropyVec aniso, double C1) : aniso_(std::move(aniso)), C1_(C1) {
    if (C1 < 0.0) throw DomainError("subsolution constant C1 must be non-negative");
    mu_ = mu_of_C1(C1, aniso_);
}

double Subsolution::h(double r) const {
    return 1.0 + xi_inverse_minus_one(C1_ * std::pow(r, -aniso_.dstar), aniso_);
}

double Subsolution::dh(double r) const {
    if (C1_ == 0.0) return 0.0;
    const double hv = h(r);
    const double hk = std::pow(hv, aniso_.k);
    return -(hv / r) * (hk - 1.0) / (hk - aniso_.t_lower);
}

double Subsolution::tail(double r) const { return sub_tail(r, C1_, aniso_); }

double Subsolution::profile(double r) const { return 0.5 * r * r + mu_ - tail(r); }

std::vector<double> Subsolution::profile_batch(std::span<const double> radii) const {
    std::vector<double> out(radii.size());
    if (radii.empty()) return out;
    std::vector<std::size_t> order(radii.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return radii[x] > radii[y]; });
    auto f = [this](double s) { return sub_tail_integrand(s, C1_, aniso_); };
    double prev_r = radii[order.front()];
    double tail_acc = C1_ == 0.0 ? 0.0 : tail(prev_r);
    for (std::size_t idx : order) {
        const double r = radii[idx];
        if (C1_ != 0.0 && r != prev_r) {
            tail_acc += (prev_r - r) > 0.05 * r ? quad::integrate(f, r, prev_r)
                                                : quad::panel(f, r, prev_r);
            prev_r = r;
        }
        out[idx] = 0.5 * r * r + mu_ - tail_acc;
    }
    return out;
}

double Subsolution::metric_radius(std::span<const double> p) const {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += aniso_.a[i] * p[i] * p[i];
    return std::sqrt(s);
}

ValueGrad Subsolution::eval(std::span<const double> p) const {
    if (p.size() != aniso_.a.size()) throw DomainError("point dimension mismatch");
    const double r = metric_radius(p);
    if (r < aniso_.eta * (1.0 - 1e-12)) {
        throw DomainError("subsolution evaluated inside the ellipse E_eta");
    }
    ValueGrad out;
    out.value = profile(r);
    const double hv = h(r);
    out.grad.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out.grad[i] = aniso_.a[i] * p[i] * hv;
    return out;
}

Eigen::MatrixXd Subsolution::hessian(std::span<const double> p) const {
    const auto d = static_cast<Eigen::Index>(p.size());
    const double r = metric_radius(p);
    const double hv = h(r);
    const double dhv = dh(r);
    Eigen::VectorXd ap(d);
    for (Eigen::Index i = 0; i < d; ++i) ap(i) = aniso_.a[i] * p[i];
    Eigen::MatrixXd m = (dhv / r) * ap * ap.transpose();
    for (Eigen::Index i = 0; i < d; ++i) m(i, i) += aniso_.a[i] * hv;
    return m;
}

double mu_of_C1(double C1, const AnisotropyVec& aniso) {
    if (C1 < 0.0) throw DomainError("mu(C1) needs C1 >= 0");
    if (!(aniso.dstar > 2.0)) {
        throw DecayConditionError("mu(C1) requires d_k^*(a) > 2, got " +
                                  std::to_string(aniso.dstar));
    }
    const double eta = aniso.eta;
    const double heta = 1.0 + xi_inverse_minus_one(C1 * std::pow(eta, -aniso.dstar), aniso);
    return sub_tail(eta, C1, aniso) - 0.5 * eta * eta + eta * eta * heta;
}

double solve_C1_for_c(double c, const AnisotropyVec& aniso) {
    const double target = -c;
    const double floor = 0.5 * aniso.eta * aniso.eta;
    if (target < floor * (1.0 - 1e-14)) {
        throw AdmissibilityError("subsolution needs -c >= eta^2/2 = " + std::to_string(floor) +
                                 ", got -c = " + std::to_string(target));
    }
    if (target <= floor) return 0.0;
    auto f = [&](double C1) { return mu_of_C1(C1, aniso) - target; };
    double hi = 1.0;
    while (f(hi) < 0.0) hi *= 4.0;
    return bracketed_root(f, 0.0, hi, 1e-14);
}

Subsolution make_subsolution(const AnisotropyVec& aniso, double c) {
    return Subsolution(aniso, solve_C1_for_c(c, aniso));
}

ValueGrad subsolution_eval(std::span<const double> p, const Subsolution& params) {
    return params.eval(p);
}

ValueGrad supersolution_eval(std::span<const double> p, const AnisotropyVec& aniso, double c) {
    if (-c < 0.5 * aniso.a_max() * (1.0 - 1e-14)) {
        throw AdmissibilityError("supersolution needs -c >= max_i a_i / 2");
    }
    if (p.size() != aniso.a.size()) throw DomainError("point dimension mismatch");
    ValueGrad out;
    out.value = -c;
    out.grad.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        out.value += 0.5 * aniso.a[i] * p[i] * p[i];
        out.grad[i] = aniso.a[i] * p[i];
    }
    return out;
}

// ---- Radial primal solutions -------------------------------------------------------------

double convexity_threshold(int k, int d) {
    return std::pow(static_cast<double>(d - k) / d, 1.0 / k);
}

namespace {

void check_kd(int k, int d) {
    if (d < 2 || k < 1 || k > d) throw DomainError("need 1 <= k <= d and d >= 2");
}

void check_r0(double r0, int k, int d, bool allow_k_convex) {
    check_kd(k, d);
    if (!(r0 > 0.0)) throw DomainError("inner radius must be positive");
    const double r2 = convexity_threshold(k, d);
    if (!allow_k_convex && !(r0 > r2)) {
        throw ConvexityError("r0 = " + std::to_string(r0) + " must exceed r2 = " +
                             std::to_string(r2) + " for a strictly convex solution");
    }
}

}  // namespace

double radial_h(double r, double r0, int k, int d) {
    const double C = std::pow(r0, d - k) - std::pow(r0, d);
    return std::pow(1.0 + C * std::pow(r, -d), 1.0 / k);
}

double mu_of_r0(double r0, int k, int d, bool allow_k_convex) {
    check_r0(r0, k, d, allow_k_convex);
    if (d <= 2) throw DomainError("mu(r0) needs d >= 3");
    const double C = std::pow(r0, d - k) - std::pow(r0, d);
    return -0.5 * r0 * r0 + radial_tail(C, k, d, r0);
}

RadialProfile radial_primal(double r0, int k, int d, double rmax, int npts, Spacing spacing,
                            bool allow_k_convex) {
    check_r0(r0, k, d, allow_k_convex);
    if (!(rmax > r0)) throw DomainError("rmax must exceed r0");
    if (npts < 2) throw DomainError("need at least two samples");
    RadialProfile p;
    p.r0 = r0;
    p.k = k;
    p.d = d;
    p.C = std::pow(r0, d - k) - std::pow(r0, d);
    p.r2 = convexity_threshold(k, d);
    p.convex_branch = r0 > p.r2;
    // for d = 2 the deviation grows like log r unless C = 0
    const bool finite_mu = d >= 3 || p.C == 0.0;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    p.mu = finite_mu ? -0.5 * r0 * r0 + radial_tail(p.C, k, d, r0) : nan;

    const auto n = static_cast<std::size_t>(npts);
    p.r.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(n - 1);
        p.r[i] = spacing == Spacing::Uniform ? r0 + s * (rmax - r0) : r0 * std::pow(rmax / r0, s);
    }
    p.r.front() = r0;
    p.r.back() = rmax;

    const double C = p.C;
    auto h_of = [C, k, d](double s) { return std::pow(1.0 + C * std::pow(s, -d), 1.0 / k); };
    auto integrand = [&](double s) { return s * h_of(s); };
    p.u.resize(n);
    p.du.resize(n);
    p.h.resize(n);
    p.dh.resize(n);
    p.d2u.resize(n);
    p.deviation.resize(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = p.r[i];
        if (i > 0) acc += quad::integrate(integrand, p.r[i - 1], r);
        p.u[i] = acc;
        const double base = 1.0 + C * std::pow(r, -d);
        p.h[i] = std::pow(base, 1.0 / k);
        p.du[i] = r * p.h[i];
        p.dh[i] = std::pow(base, 1.0 / k - 1.0) * (-d * C * std::pow(r, -d - 1)) / k;
        p.d2u[i] = p.h[i] + r * p.dh[i];
        p.deviation[i] = finite_mu ? -radial_tail(C, k, d, r) : nan;
    }
    return p;
}

double r0_for_mu(double mu_target, int k, int d) {
    check_kd(k, d);
    const double r2 = convexity_threshold(k, d);
    const double top = cstar(k, d, {});
    if (!(mu_target < top)) {
        throw AdmissibilityError("no convex radial solution: mu must stay below c_* = " +
                                 std::to_string(top));
    }
    auto f = [&](double r0) { return mu_of_r0(r0, k, d) - mu_target; };
    double lo = r2 > 0.0 ? r2 * (1.0 + 1e-12) + 1e-14 : 1e-8;
    while (f(lo) < 0.0 && lo < 1.0) lo = 0.5 * (lo + (r2 > 0.0 ? r2 : 0.0));
    double hi = std::max(1.0, 2.0 * lo);
    while (f(hi) > 0.0) hi *= 2.0;
    return bracketed_root(f, lo, hi, 1e-15);
}

double cstar(int k, int d, std::span<const double> b) {
    check_kd(k, d);
    if (d < 3) throw DomainError("c_* needs d >= 3");
    double b2 = 0.0;
    for (double v : b) b2 += v * v;
    if (k < d) {
        const double ratio = static_cast<double>(d - k) / d;
        const double inner = -0.5 + radial_tail(static_cast<double>(k) / (d - k), k, d, 1.0);
        return std::pow(ratio, 2.0 / k) * inner + 0.5 * b2;
    }
    // (1 + tau^{-d})^{1/d} - 1 written as ((tau^d + 1)^{1/d} - tau)/tau near the origin
    auto near = [d](double tau) { return std::pow(std::pow(tau, d) + 1.0, 1.0 / d) - tau; };
    return quad::integrate(near, 0.0, 1.0) + radial_tail(1.0, d, d, 1.0) + 0.5 * b2;
}

double chat(int k, int d) {
    check_kd(k, d);
    if (k >= d) throw DomainError("c_hat is defined for k <= d - 1");
    auto neg_mu = [k, d](double r0) { return -mu_of_r0(r0, k, d, true); };
    // coarse logarithmic scan, then Brent on the bracketing cell
    const int n = 80;
    const double lo = 1e-4, hi = 10.0;
    std::vector<double> xs(n + 1);
    std::size_t best = 0;
    double best_v = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
        xs[i] = lo * std::pow(hi / lo, static_cast<double>(i) / n);
        const double v = neg_mu(xs[i]);
        if (v < best_v) {
            best_v = v;
            best = static_cast<std::size_t>(i);
        }
    }
    const double a = xs[best == 0 ? 0 : best - 1];
    const double c = xs[std::min<std::size_t>(best + 1, n)];
    const auto res = boost::math::tools::brent_find_minima(neg_mu, a, c, 52);
    return -std::min(res.second, best_v);
}

double cbar(const SymMatrix& A, std::span<const double> b) {
    const auto lam = spectrum(A);
    if (!(lam.min() > 0.0)) throw DomainError("c_bar needs a positive definite A");
    if (b.size() != A.dim() && !b.empty()) throw DomainError("b has the wrong dimension");
    double b2 = 0.0;
    for (double v : b) b2 += v * v;
    return (b2 * lam.min() - lam.max()) / (2.0 * lam.min() * lam.max());
}

}  // namespace serrin
