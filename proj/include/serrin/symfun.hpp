#pragma once

#include "serrin/errors.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace serrin {

/// Eigenvalues of a symmetric matrix, kept in non-decreasing order.
class EigenSpectrum {
public:
    EigenSpectrum() = default;
    explicit EigenSpectrum(std::vector<double> lambda);

    std::size_t dim() const { return lambda_.size(); }
    double operator[](std::size_t i) const { return lambda_[i]; }
    std::span<const double> values() const { return lambda_; }
    double min() const { return lambda_.front(); }
    double max() const { return lambda_.back(); }

private:
    std::vector<double> lambda_;
};

/// Real symmetric d x d matrix stored as its upper triangle, so M(i,j) == M(j,i) exactly.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(std::size_t d);
    /// Symmetrizes as (M + M^T)/2.
    static SymMatrix from_dense(const Eigen::MatrixXd& m);
    static SymMatrix identity(std::size_t d);
    static SymMatrix diagonal(std::span<const double> diag);

    std::size_t dim() const { return d_; }
    double operator()(std::size_t i, std::size_t j) const { return packed_[slot(i, j)]; }
    double& operator()(std::size_t i, std::size_t j) { return packed_[slot(i, j)]; }

    Eigen::MatrixXd dense() const;

private:
    std::size_t slot(std::size_t i, std::size_t j) const;

    std::size_t d_ = 0;
    std::vector<double> packed_;
};

/// Orthonormal eigen-decomposition M = Q diag(lambda) Q^T with ascending lambda.
struct EigenDecomposition {
    EigenSpectrum lambda;
    Eigen::MatrixXd vectors;
};

EigenDecomposition eigen_decompose(const SymMatrix& m);
EigenSpectrum spectrum(const SymMatrix& m);

/// k-th elementary symmetric function; sigma_0 = 1.
double sigma_k(std::span<const double> lambda, int k);
double sigma_k(const EigenSpectrum& lambda, int k);

/// sigma_k of lambda with entry i deleted. k = 0 gives 1, k < 0 gives 0.
double sigma_k_reduced(std::span<const double> lambda, int k, std::size_t i);
double sigma_k_reduced(const EigenSpectrum& lambda, int k, std::size_t i);

/// All of sigma_0..sigma_d in one pass.
std::vector<double> elementary_symmetric_all(std::span<const double> lambda);

bool in_gamma_k(std::span<const double> lambda, int k);
bool in_gamma_k(const EigenSpectrum& lambda, int k);

double binomial(int n, int k);

// Hessian-quotient operator F(M) = (sigma_d / sigma_{d-k})^{1/k} on the positive cone.

double quotient_value(std::span<const double> lambda, int k);
/// dF/dlambda_i for each i.
std::vector<double> quotient_gradient(std::span<const double> lambda, int k);

double hessian_quotient(const SymMatrix& m, int k);
/// The matrix F^{ij}(M) = dF/dM_ij.
SymMatrix quotient_derivative(const SymMatrix& m, int k);
/// sigma_k^{ij}(M) = d sigma_k(lambda(M)) / dM_ij.
SymMatrix sigma_k_derivative(const SymMatrix& m, int k);

/// Fixed-size 3x3 fast path used per grid node by the annulus solver.
struct Quotient3 {
    double value = 0.0;
    Eigen::Matrix3d gradient = Eigen::Matrix3d::Zero();
    double lambda_min = 0.0;
};

/// Evaluates F and F^{ij} for a 3x3 symmetric matrix. Throws ConeError if not positive definite.
Quotient3 quotient3(const Eigen::Matrix3d& m, int k);

}  // namespace serrin
