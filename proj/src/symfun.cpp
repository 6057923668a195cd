#include "serrin/symfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace serrin {

namespace {

void check_order(std::size_t d, int k, int lo, int hi_offset) {
    if (k < lo || k > static_cast<int>(d) + hi_offset) {
        throw DomainError("elementary symmetric order k=" + std::to_string(k) +
                          " out of range for dimension " + std::to_string(d));
    }
}

// e[j] accumulates sigma_j of the entries seen so far; skip < 0 keeps every entry.
std::vector<double> esf_prefix(std::span<const double> lambda, int kmax, std::ptrdiff_t skip) {
    std::vector<double> e(static_cast<std::size_t>(kmax) + 1, 0.0);
    e[0] = 1.0;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        if (static_cast<std::ptrdiff_t>(i) == skip) continue;
        const double l = lambda[i];
        for (int j = kmax; j >= 1; --j) e[j] += l * e[j - 1];
    }
    return e;
}

}  // namespace

EigenSpectrum::EigenSpectrum(std::vector<double> lambda) : lambda_(std::move(lambda)) {
    if (lambda_.empty()) throw DomainError("empty spectrum");
    std::sort(lambda_.begin(), lambda_.end());
}

SymMatrix::SymMatrix(std::size_t d) : d_(d), packed_(d * (d + 1) / 2, 0.0) {}

std::size_t SymMatrix::slot(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    // row i of the upper triangle starts after i rows of decreasing length
    return i * d_ - i * (i - 1) / 2 + (j - i);
}

SymMatrix SymMatrix::from_dense(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw DomainError("matrix is not square");
    SymMatrix s(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = i; j < m.cols(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
    return s;
}

SymMatrix SymMatrix::identity(std::size_t d) {
    SymMatrix s(d);
    for (std::size_t i = 0; i < d; ++i) s(i, i) = 1.0;
    return s;
}

SymMatrix SymMatrix::diagonal(std::span<const double> diag) {
    SymMatrix s(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) s(i, i) = diag[i];
    return s;
}

Eigen::MatrixXd SymMatrix::dense() const {
    Eigen::MatrixXd m(d_, d_);
    for (std::size_t i = 0; i < d_; ++i)
        for (std::size_t j = 0; j < d_; ++j) m(i, j) = (*this)(i, j);
    return m;
}

EigenDecomposition eigen_decompose(const SymMatrix& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.dense());
    if (es.info() != Eigen::Success) throw DomainError("eigen-decomposition failed to converge");
    const auto& ev = es.eigenvalues();
    return {EigenSpectrum(std::vector<double>(ev.data(), ev.data() + ev.size())), es.eigenvectors()};
}

EigenSpectrum spectrum(const SymMatrix& m) { return eigen_decompose(m).lambda; }

double sigma_k(std::span<const double> lambda, int k) {
    check_order(lambda.size(), k, 0, 0);
    if (k == 0) return 1.0;
    return esf_prefix(lambda, k, -1)[static_cast<std::size_t>(k)];
}

double sigma_k(const EigenSpectrum& lambda, int k) {
    if (k < 1) check_order(lambda.dim(), k, 1, 0);
    return sigma_k(lambda.values(), k);
}

double sigma_k_reduced(std::span<const double> lambda, int k, std::size_t i) {
    if (i >= lambda.size()) {
        throw DomainError("reduced index " + std::to_string(i) + " out of range for dimension " +
                          std::to_string(lambda.size()));
    }
    if (k < 0) return 0.0;
    if (k == 0) return 1.0;
    check_order(lambda.size(), k, 0, -1);
    return esf_prefix(lambda, k, static_cast<std::ptrdiff_t>(i))[static_cast<std::size_t>(k)];
}

double sigma_k_reduced(const EigenSpectrum& lambda, int k, std::size_t i) {
    return sigma_k_reduced(lambda.values(), k, i);
}

std::vector<double> elementary_symmetric_all(std::span<const double> lambda) {
    return esf_prefix(lambda, static_cast<int>(lambda.size()), -1);
}

bool in_gamma_k(std::span<const double> lambda, int k) {
    check_order(lambda.size(), k, 1, 0);
    const auto e = esf_prefix(lambda, k, -1);
    for (int j = 1; j <= k; ++j)
        if (!(e[static_cast<std::size_t>(j)] > 0.0)) return false;
    return true;
}

bool in_gamma_k(const EigenSpectrum& lambda, int k) { return in_gamma_k(lambda.values(), k); }

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return std::round(r);
}

double quotient_value(std::span<const double> lambda, int k) {
    const std::size_t d = lambda.size();
    check_order(d, k, 1, 0);
    for (double l : lambda)
        if (!(l > 0.0)) throw ConeError("Hessian quotient needs a positive definite argument");
    const int l = static_cast<int>(d) - k;
    const auto e = esf_prefix(lambda, static_cast<int>(d), -1);
    return std::pow(e[d] / e[static_cast<std::size_t>(l)], 1.0 / k);
}

std::vector<double> quotient_gradient(std::span<const double> lambda, int k) {
    const std::size_t d = lambda.size();
    const double f = quotient_value(lambda, k);
    const int l = static_cast<int>(d) - k;
    const double sigma_l = sigma_k(lambda, l);
    std::vector<double> g(d);
    for (std::size_t i = 0; i < d; ++i) {
        // d log sigma_d / d lambda_i = 1/lambda_i on the positive cone
        const double dl = l == 0 ? 0.0 : sigma_k_reduced(lambda, l - 1, i) / sigma_l;
        g[i] = f / k * (1.0 / lambda[i] - dl);
    }
    return g;
}

double hessian_quotient(const SymMatrix& m, int k) {
    return quotient_value(spectrum(m).values(), k);
}

namespace {

SymMatrix spectral_gradient(const EigenDecomposition& ed, std::span<const double> g) {
    const auto d = static_cast<Eigen::Index>(g.size());
    Eigen::VectorXd gv(d);
    for (Eigen::Index i = 0; i < d; ++i) gv(i) = g[static_cast<std::size_t>(i)];
    const Eigen::MatrixXd out = ed.vectors * gv.asDiagonal() * ed.vectors.transpose();
    return SymMatrix::from_dense(out);
}

}  // namespace

SymMatrix quotient_derivative(const SymMatrix& m, int k) {
    const auto ed = eigen_decompose(m);
    return spectral_gradient(ed, quotient_gradient(ed.lambda.values(), k));
}

SymMatrix sigma_k_derivative(const SymMatrix& m, int k) {
    const auto ed = eigen_decompose(m);
    const std::size_t d = m.dim();
    check_order(d, k, 1, 0);
    std::vector<double> g(d);
    for (std::size_t i = 0; i < d; ++i) g[i] = sigma_k_reduced(ed.lambda.values(), k - 1, i);
    return spectral_gradient(ed, g);
}

Quotient3 quotient3(const Eigen::Matrix3d& m, int k) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
    const Eigen::Vector3d lam = es.eigenvalues();
    Quotient3 q;
    q.lambda_min = lam(0);
    if (!(lam(0) > 0.0)) throw ConeError("Hessian quotient needs a positive definite argument");
    const std::array<double, 3> l{lam(0), lam(1), lam(2)};
    q.value = quotient_value(l, k);
    const auto g = quotient_gradient(l, k);
    const Eigen::Matrix3d& v = es.eigenvectors();
    q.gradient = v * Eigen::Vector3d(g[0], g[1], g[2]).asDiagonal() * v.transpose();
    return q;
}

}  // namespace serrin
