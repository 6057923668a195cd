#pragma once

// Independent reference computations for the tests. Nothing here calls into the library: the
// quadratures, root finders and ODE integrators are Boost's, applied to the formulas directly.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

inline double choose(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// sigma_k by summing over all k-subsets (bitmasks), for d <= 20.
inline double sigma_subsets(const std::vector<double>& lam, int k) {
    if (k == 0) return 1.0;
    const int d = static_cast<int>(lam.size());
    double s = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
        if (__builtin_popcount(mask) != k) continue;
        double p = 1.0;
        for (int i = 0; i < d; ++i)
            if (mask & (1u << i)) p *= lam[static_cast<std::size_t>(i)];
        s += p;
    }
    return s;
}

/// Radial primal h(r) = (1 + C r^-d)^(1/k), C = r0^(d-k) - r0^d.
inline double radial_C(double r0, int k, int d) { return std::pow(r0, d - k) - std::pow(r0, d); }

/// mu(r0) = -r0^2/2 + int_{r0}^inf s (h - 1) ds by exp-sinh on the half line.
inline double mu(double r0, int k, int d) {
    const double C = radial_C(r0, k, d);
    boost::math::quadrature::exp_sinh<double> es;
    auto f = [&](double x) {
        const double s = r0 + x;
        // h - 1 written to avoid cancellation for small C s^-d
        const double q = C * std::pow(s, -d);
        return s * std::expm1(std::log1p(q) / k);
    };
    return -0.5 * r0 * r0 + es.integrate(f, 1e-14);
}

/// Radial u(r) = int_{r0}^r s h(s) ds by tanh-sinh.
inline double radial_u(double r, double r0, int k, int d) {
    if (r == r0) return 0.0;
    const double C = radial_C(r0, k, d);
    boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate([&](double s) { return s * std::pow(1.0 + C * std::pow(s, -d), 1.0 / k); }, r0, r, 1e-14);
}

inline double r2(int k, int d) { return std::pow(double(d - k) / d, 1.0 / k); }

/// sup over r0 > 0 of mu(r0), k < d, by Brent's method in log r0.
inline double mu_sup(int k, int d) {
    auto neg = [&](double lr) { return -mu(std::exp(lr), k, d); };
    const auto res = boost::math::tools::brent_find_minima(neg, std::log(1e-3), std::log(2.0), 52);
    return -res.second;
}

/// Conjugate of the radial profile at |p| = rho: solve r h(r) = rho, then u* = rho r - u(r).
inline double radial_conjugate(double rho, double r0, int k, int d) {
    const double C = radial_C(r0, k, d);
    auto F = [&](double r) { return r * std::pow(1.0 + C * std::pow(r, -d), 1.0 / k) - rho; };
    std::uintmax_t it = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(52);
    double hi = 2.0 * r0;
    while (F(hi) < 0.0) hi *= 2.0;
    if (F(r0) >= 0.0) return rho * r0;
    const auto br = boost::math::tools::toms748_solve(F, r0, hi, tol, it);
    const double r = 0.5 * (br.first + br.second);
    return rho * r - radial_u(r, r0, k, d);
}

/// Isotropic dual radial problem: with g = u*'/rho the tangential eigenvalue and lambda_r = u*'',
/// the quotient equation lambda_r g^(d-1) / sigma_{d-k}(lambda_r, g, ..., g) = 1/C(d,k) solves to
/// lambda_r = C(d-1,k-1) g / (C(d,k) g^k - C(d-1,k)).
struct DualODE {
    int d, k;
    double lambda_r(double g) const {
        return choose(d - 1, k - 1) * g / (choose(d, k) * std::pow(g, k) - choose(d - 1, k));
    }
    // decay exponent of g - 1 from the linearization at g = 1
    double beta() const {
        const double e = 1e-6;
        const double slope = (lambda_r(1.0 + e) - lambda_r(1.0 - e)) / (2.0 * e);
        return 1.0 - slope;
    }
};

/// Integrates (e = g - 1, w = u* - rho^2/2) outward from rho = 1 with g(1) = s and u*(1) = s
/// (Robin), sampling u* at rhos. Both components decay, so the step control is relative.
inline std::vector<double> dual_profile(const DualODE& ode, double s, const std::vector<double>& rhos,
                                        double* limit = nullptr, double rho_far = 1e3) {
    using State = std::array<double, 2>;
    namespace odeint = boost::numeric::odeint;
    auto rhs = [&](const State& y, State& dy, double rho) {
        dy[0] = (ode.lambda_r(1.0 + y[0]) - 1.0 - y[0]) / rho;
        dy[1] = rho * y[0];
    };
    auto stepper = odeint::make_dense_output(1e-30, 1e-13, odeint::runge_kutta_dopri5<State>());
    State y{s - 1.0, s - 0.5};
    double rho = 1.0;
    std::vector<double> out;
    out.reserve(rhos.size());
    for (double target : rhos) {
        if (target > rho) odeint::integrate_adaptive(stepper, rhs, y, rho, target, 1e-3);
        rho = std::max(rho, target);
        out.push_back(y[1] + 0.5 * rho * rho);
    }
    if (limit) {
        if (rho_far > rho) odeint::integrate_adaptive(stepper, rhs, y, rho, rho_far, 1e-3);
        const double b = ode.beta();
        // w' = rho e ~ rho^(1-b), so the tail beyond rho_far is e rho^2 / (b - 2)
        *limit = y[1] + y[0] * rho_far * rho_far / (b - 2.0);
    }
    return out;
}

/// Shooting for g(1) so that u* - rho^2/2 -> -c; returns the slope s.
inline double dual_shoot(const DualODE& ode, double c) {
    auto F = [&](double s) {
        double L = 0.0;
        dual_profile(ode, s, {}, &L);
        return L + c;
    };
    // s = 1 gives g = 1, u* = (rho^2 + 1)/2 and the limit 1/2
    if (F(1.0) == 0.0) return 1.0;
    std::uintmax_t it = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(50);
    const auto br = boost::math::tools::toms748_solve(F, 1.0, 20.0, tol, it);
    return 0.5 * (br.first + br.second);
}

}  // namespace oracle
