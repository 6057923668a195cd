#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "serrin/errors.hpp"
#include "serrin/radial.hpp"
#include "serrin/symfun.hpp"

#include <Eigen/Dense>

using namespace serrin;

TEST_CASE("r0 = 1 gives the quadratic (r^2 - 1)/2 for every k <= d <= 5") {
    double worst = 0.0;
    for (int d = 2; d <= 5; ++d)
        for (int k = 1; k <= d; ++k)
            for (auto sp : {Spacing::Uniform, Spacing::Geometric}) {
                const auto p = radial_primal(1.0, k, d, 50.0, 301, sp);
                CHECK(p.C == 0.0);
                for (std::size_t i = 0; i < p.r.size(); ++i)
                    worst = std::max(worst, std::abs(p.u[i] - 0.5 * (p.r[i] * p.r[i] - 1.0)));
            }
    CHECK(worst <= 1e-12);
}

TEST_CASE("profile samples match independent quadrature and satisfy the radial ODE") {
    for (int d = 3; d <= 5; ++d)
        for (int k = 1; k <= d; ++k)
            for (double r0 : {0.8, 1.3}) {
                if (r0 <= oracle::r2(k, d)) continue;
                const auto p = radial_primal(r0, k, d, 20.0, 121, Spacing::Geometric);
                double ode = 0.0, quad = 0.0, dev = 0.0;
                const double mu = oracle::mu(r0, k, d);
                for (std::size_t i = 0; i < p.r.size(); ++i) {
                    const double h = p.h[i], r = p.r[i];
                    // h^k + (k/d) r h' h^(k-1) = 1
                    ode = std::max(ode, std::abs(std::pow(h, k) + double(k) / d * r * p.dh[i] * std::pow(h, k - 1) - 1.0));
                    if (i % 10 == 0) quad = std::max(quad, std::abs(p.u[i] - oracle::radial_u(r, r0, k, d)));
                    dev = std::max(dev, std::abs(p.deviation[i] - (p.u[i] - 0.5 * r * r - mu)));
                    CHECK(p.du[i] == doctest::Approx(r * h).epsilon(1e-14));
                    CHECK(p.d2u[i] > 0.0);
                }
                CHECK(ode <= 1e-10);
                CHECK(quad <= 1e-10);
                CHECK(dev <= 1e-9);
                CHECK(p.mu == doctest::Approx(mu).epsilon(1e-11));
                CHECK(mu_of_r0(r0, k, d) == doctest::Approx(mu).epsilon(1e-11));
            }
}

TEST_CASE("r0 below the convexity threshold needs the k-convex flag") {
    // r2 = ((d - k)/d)^(1/k)
    CHECK(convexity_threshold(1, 3) == doctest::Approx(2.0 / 3.0));
    CHECK(convexity_threshold(2, 3) == doctest::Approx(std::sqrt(1.0 / 3.0)));
    CHECK_THROWS_AS(radial_primal(0.5, 1, 3, 5.0, 21), ConvexityError);
    const auto p = radial_primal(0.5, 1, 3, 5.0, 41, Spacing::Uniform, true);
    CHECK_FALSE(p.convex_branch);
    CHECK(p.d2u.front() < 0.0);
    CHECK(p.d2u.back() > 0.0);
}

TEST_CASE("mu is decreasing beyond r2 and r0_for_mu inverts it") {
    for (auto [k, d] : {std::pair{1, 3}, {2, 3}, {3, 3}, {2, 4}}) {
        double prev = std::numeric_limits<double>::infinity();
        for (double r0 = std::max(oracle::r2(k, d) * 1.01, 0.2); r0 < 3.0; r0 += 0.1) {
            const double m = mu_of_r0(r0, k, d);
            CHECK(m < prev);
            prev = m;
            CHECK(r0_for_mu(m, k, d) == doctest::Approx(r0).epsilon(1e-9));
        }
    }
}

TEST_CASE("c_* is the limit of mu at r2 from above") {
    for (auto [k, d] : {std::pair{1, 3}, {2, 3}, {2, 4}, {3, 4}, {3, 3}}) {
        // k = d has r2 = 0, where the integrand stays bounded and mu(0+) is approached linearly
        const double oracle_value = oracle::mu(std::max(oracle::r2(k, d), 1e-9), k, d);
        CHECK(std::abs(cstar(k, d, {}) - oracle_value) <= 1e-6);
    }
    const std::vector<double> b{1.0, 0.0, 0.0};
    CHECK(cstar(2, 3, b) == doctest::Approx(cstar(2, 3, {}) + 0.5).epsilon(1e-14));
}

TEST_CASE("c_hat is the supremum of mu over all radii") {
    for (auto [k, d] : {std::pair{1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 4}})
        CHECK(std::abs(chat(k, d) - oracle::mu_sup(k, d)) <= 1e-9);
    // k = 1: mu(r0) = (r0^2 - r0^d)/(d - 2) - r0^2/2 peaks at r0^(d-2) = 2/d
    for (int d = 3; d <= 5; ++d) CHECK(chat(1, d) == doctest::Approx(1.0 / (2.0 * d * (d - 2))).epsilon(1e-12));
}

TEST_CASE("c_bar") {
    CHECK(cbar(SymMatrix::identity(3), std::vector<double>(3, 0.0)) == -0.5);
    const std::vector<double> lam{0.5, 1.0, 2.0};
    const std::vector<double> b{0.0, 1.0, 0.0};
    // (|b|^2 lmin - lmax) / (2 lmin lmax) = (0.5 - 2) / 2
    CHECK(cbar(SymMatrix::diagonal(lam), b) == doctest::Approx(-0.75));
}

TEST_CASE("anisotropy exponents and the xi map") {
    const auto an = AnisotropyVec::make({1.1, 1.0, 1.0 / 1.1}, 3);
    CHECK(an.admissible);
    CHECK(an.eta == doctest::Approx(std::sqrt(1.0 / 1.1)));
    for (double y : {1e-6, 0.01, 1.0, 10.0}) {
        const double h = xi_inverse(y, an);
        CHECK(h >= 1.0);
        CHECK(xi_eval(h, an) == doctest::Approx(y).epsilon(1e-12));
        const double e = 1e-6 * h;
        CHECK(xi_derivative(h, an) == doctest::Approx((xi_eval(h + e, an) - xi_eval(h - e, an)) / (2 * e)).epsilon(1e-6));
    }
    const auto mid = an.along_path(0.5);
    CHECK(mid.a[0] == doctest::Approx(1.05));
    CHECK_FALSE(AnisotropyVec::make({2.0, 1.0, 1.0}, 3).admissible);
}

TEST_CASE("subsolution: mu(C1) = -c, gradient by differences, exact dual solution when a = 1") {
    for (int k = 1; k <= 3; ++k) {
        const auto an = AnisotropyVec::make({1.0, 1.0, 1.0}, k);
        for (double c : {-0.5, -1.0, -3.0}) {
            const auto sub = make_subsolution(an, c);
            CHECK(sub.mu() == doctest::Approx(-c).epsilon(1e-12));
            // Robin on the unit sphere and the quotient equation at interior points
            const std::vector<double> e1{1.0, 0.0, 0.0};
            const double h = 1e-5;
            const double dn = (sub.profile(1.0 + h) - sub.profile(1.0 - h)) / (2 * h);
            CHECK(std::abs(sub.profile(1.0) - dn) < 1e-8);
            for (double r : {1.05, 1.7, 4.0}) {
                const std::vector<double> p{r * 0.6, r * 0.0, r * 0.8};
                const auto H = sub.hessian(p);
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
                std::vector<double> lam(es.eigenvalues().data(), es.eigenvalues().data() + 3);
                const double q = sigma_k(lam, 3) / sigma_k(lam, 3 - k);
                CHECK(q == doctest::Approx(1.0 / oracle::choose(3, k)).epsilon(1e-9));
                const auto vg = sub.eval(p);
                for (int i = 0; i < 3; ++i) {
                    auto pp = p, pm = p;
                    pp[static_cast<std::size_t>(i)] += h;
                    pm[static_cast<std::size_t>(i)] -= h;
                    CHECK(vg.grad[static_cast<std::size_t>(i)] ==
                          doctest::Approx((sub.eval(pp).value - sub.eval(pm).value) / (2 * h)).epsilon(1e-8));
                }
            }
        }
    }
}

TEST_CASE("subsolution lies below the supersolution") {
    const auto an = AnisotropyVec::make({1.1, 1.0, 1.0 / 1.1}, 3);
    const auto sub = make_subsolution(an, -1.0);
    for (double r : {1.0, 1.5, 3.0, 10.0})
        for (double th : {0.1, 1.0, 2.5}) {
            const std::vector<double> p{r * std::sin(th), 0.3 * r * std::sin(th), r * std::cos(th)};
            const double scale = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) / r;
            const std::vector<double> q{p[0] / scale, p[1] / scale, p[2] / scale};
            CHECK(sub.eval(q).value <= supersolution_eval(q, an, -1.0).value + 1e-12);
        }
    const std::vector<double> radii{1.0, 1.3, 2.0, 5.0, 9.0};
    const auto batch = sub.profile_batch(radii);
    for (std::size_t i = 0; i < radii.size(); ++i) CHECK(batch[i] == doctest::Approx(sub.profile(radii[i])).epsilon(1e-12));
}
