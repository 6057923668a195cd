#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "serrin/errors.hpp"
#include "serrin/radial.hpp"
#include "serrin/symfun.hpp"

#include <Eigen/Dense>

#include <random>

using namespace serrin;

namespace {

std::vector<double> random_spectrum(std::mt19937_64& rng, int d, bool positive) {
    std::uniform_real_distribution<double> pos(0.1, 3.0), any(-2.0, 3.0);
    std::vector<double> v(static_cast<std::size_t>(d));
    for (auto& x : v) x = positive ? pos(rng) : any(rng);
    return v;
}

double rel(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

// sigma_k with entry i removed; zero once k exceeds the d - 1 remaining entries
double reduced(const std::vector<double>& lam, int k, std::size_t i) {
    return k > static_cast<int>(lam.size()) - 1 ? 0.0 : sigma_k_reduced(lam, k, i);
}

}  // namespace

TEST_CASE("sigma_k matches subset enumeration and the algebraic identities on 1000 spectra") {
    std::mt19937_64 rng(20261016);
    double worst_subset = 0.0, worst_newton = 0.0, worst_reduced = 0.0, worst_sum = 0.0, worst_euler = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int d = 2 + trial % 6;
        const auto lam = random_spectrum(rng, d, trial % 3 != 0);
        const auto all = elementary_symmetric_all(lam);
        REQUIRE(all.size() == static_cast<std::size_t>(d + 1));
        std::vector<double> p(static_cast<std::size_t>(d + 1), 0.0);
        for (int m = 1; m <= d; ++m)
            for (double l : lam) p[static_cast<std::size_t>(m)] += std::pow(l, m);
        for (int k = 0; k <= d; ++k) {
            const double s = sigma_k(lam, k);
            worst_subset = std::max(worst_subset, rel(s, oracle::sigma_subsets(lam, k)));
            worst_subset = std::max(worst_subset, rel(all[static_cast<std::size_t>(k)], s));
            if (k >= 1) {
                // Newton's identities: k sigma_k = sum_i (-1)^(i-1) sigma_{k-i} p_i
                double rhs = 0.0;
                for (int i = 1; i <= k; ++i)
                    rhs += ((i % 2) ? 1.0 : -1.0) * sigma_k(lam, k - i) * p[static_cast<std::size_t>(i)];
                worst_newton = std::max(worst_newton, rel(k * s, rhs));
                double sum_red = 0.0, euler = 0.0;
                for (std::size_t i = 0; i < lam.size(); ++i) {
                    // sigma_k = sigma_{k;i} + lambda_i sigma_{k-1;i}
                    worst_reduced = std::max(
                        worst_reduced, rel(s, reduced(lam, k, i) + lam[i] * reduced(lam, k - 1, i)));
                    sum_red += reduced(lam, k - 1, i);
                    euler += lam[i] * reduced(lam, k - 1, i);
                }
                worst_sum = std::max(worst_sum, rel(sum_red, (d - k + 1) * sigma_k(lam, k - 1)));
                worst_euler = std::max(worst_euler, rel(euler, k * s));
            }
        }
    }
    CHECK(worst_subset < 1e-12);
    CHECK(worst_newton < 1e-10);
    CHECK(worst_reduced < 1e-12);
    CHECK(worst_sum < 1e-12);
    CHECK(worst_euler < 1e-12);
}

TEST_CASE("sigma_k edge cases and binomials") {
    const std::vector<double> v{1.0, 2.0, 3.0};
    CHECK(sigma_k(v, 0) == 1.0);
    CHECK_THROWS(sigma_k(v, 4));
    CHECK(sigma_k_reduced(v, -1, 0) == 0.0);
    CHECK(sigma_k(v, 3) == doctest::Approx(6.0));
    for (int n = 0; n <= 10; ++n)
        for (int k = 0; k <= n; ++k) CHECK(binomial(n, k) == oracle::choose(n, k));
}

TEST_CASE("Gamma_k membership") {
    CHECK(in_gamma_k(std::vector<double>{1, 1, 1}, 3));
    CHECK(in_gamma_k(std::vector<double>{3, 3, -1}, 1));
    CHECK(in_gamma_k(std::vector<double>{3, 3, -1}, 2));  // sigma_2 = 9 - 6 = 3
    CHECK_FALSE(in_gamma_k(std::vector<double>{3, 3, -1}, 3));
    CHECK_FALSE(in_gamma_k(std::vector<double>{1, 1, -5}, 1));
}

TEST_CASE("Maclaurin: (sigma_k / C(d,k))^(1/k) is non-increasing in k on the positive cone") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 2 + trial % 5;
        const auto lam = random_spectrum(rng, d, true);
        double prev = std::numeric_limits<double>::infinity();
        for (int k = 1; k <= d; ++k) {
            const double m = std::pow(sigma_k(lam, k) / oracle::choose(d, k), 1.0 / k);
            CHECK(m <= prev * (1.0 + 1e-13));
            prev = m;
        }
    }
}

TEST_CASE("quotient gradient and matrix derivatives agree with central differences") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int trial = 0; trial < 60; ++trial) {
        const int d = 2 + trial % 4;
        const int k = 1 + trial % d;
        const auto lam = random_spectrum(rng, d, true);
        const auto g = quotient_gradient(lam, k);
        for (int i = 0; i < d; ++i) {
            auto lp = lam, lm = lam;
            const double h = 1e-6;
            lp[static_cast<std::size_t>(i)] += h;
            lm[static_cast<std::size_t>(i)] -= h;
            const double fd = (quotient_value(lp, k) - quotient_value(lm, k)) / (2 * h);
            CHECK(std::abs(fd - g[static_cast<std::size_t>(i)]) < 1e-7);
        }
        // random SPD matrix, derivative with respect to the symmetric entries
        Eigen::MatrixXd B(d, d);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) B(a, b) = nd(rng);
        const Eigen::MatrixXd M = B * B.transpose() + Eigen::MatrixXd::Identity(d, d);
        const auto S = SymMatrix::from_dense(M);
        const auto F = quotient_derivative(S, k);
        const auto Sk = sigma_k_derivative(S, k);
        for (int a = 0; a < d; ++a)
            for (int b = a; b < d; ++b) {
                Eigen::MatrixXd E = Eigen::MatrixXd::Zero(d, d);
                E(a, b) = 1.0;
                E(b, a) = 1.0;
                const double h = 1e-6;
                const auto Mp = SymMatrix::from_dense(M + h * E), Mm = SymMatrix::from_dense(M - h * E);
                const double scale = a == b ? 1.0 : 2.0;  // both entries move
                const double fdq = (hessian_quotient(Mp, k) - hessian_quotient(Mm, k)) / (2 * h);
                const double fds = (sigma_k(spectrum(Mp), k) - sigma_k(spectrum(Mm), k)) / (2 * h);
                CHECK(std::abs(fdq - scale * F(a, b)) < 1e-6 * (1.0 + std::abs(fdq)));
                CHECK(std::abs(fds - scale * Sk(a, b)) < 1e-6 * (1.0 + std::abs(fds)));
            }
    }
}

TEST_CASE("3x3 fast path agrees with the general quotient and rejects indefinite input") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::Matrix3d B;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) B(a, b) = nd(rng);
        const Eigen::Matrix3d M = B * B.transpose() + 0.2 * Eigen::Matrix3d::Identity();
        for (int k = 1; k <= 3; ++k) {
            const auto q = quotient3(M, k);
            const auto S = SymMatrix::from_dense(M);
            CHECK(q.value == doctest::Approx(hessian_quotient(S, k)).epsilon(1e-12));
            const auto F = quotient_derivative(S, k);
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) CHECK(std::abs(q.gradient(a, b) - F(a, b)) < 1e-10);
        }
    }
    Eigen::Matrix3d bad = Eigen::Matrix3d::Identity();
    bad(2, 2) = -0.1;
    CHECK_THROWS_AS(quotient3(bad, 2), ConeError);
}

TEST_CASE("d_k^* through a and through 1/a agree") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.3, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 3 + trial % 3;
        const int k = 1 + trial % d;
        std::vector<double> a(static_cast<std::size_t>(d));
        for (auto& x : a) x = u(rng);
        CHECK(dstar(a, k) == doctest::Approx(dstar_from_inverse(a, k)).epsilon(1e-12));
    }
    const std::vector<double> ones(3, 1.0);
    // isotropic: t_lower_l = l/d, so d* = (d - l) / (1 - l/d) = d
    for (int k = 1; k <= 3; ++k) CHECK(dstar(ones, k) == doctest::Approx(3.0).epsilon(1e-14));
}
