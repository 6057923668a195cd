#pragma once

#include "serrin/radial.hpp"
#include "serrin/symfun.hpp"

#include <Eigen/Dense>

#include <vector>

namespace serrin {

/// Primal exterior problem sigma_k(D^2 u) = C(d,k) outside Omega, u = 0 and du/dnu = 1 on the
/// boundary, u(x) - (x.Ax/2 + b.x + c) -> 0 at infinity.
struct ProblemSpec {
    int d = 3;
    int k = 2;
    SymMatrix A;
    std::vector<double> b;
    double c = 0.0;

    static ProblemSpec isotropic(int d, int k, double c);
    /// A = diag(lambda).
    static ProblemSpec diagonal(std::vector<double> lambda, int k, double c);
};

/// The same problem after x = Q y + shift, which makes A diagonal and removes b.
struct ReducedProblem {
    ProblemSpec original;
    Eigen::MatrixXd Q;           ///< columns are eigenvectors of A
    std::vector<double> lambda;  ///< eigenvalues of A, ascending
    Eigen::VectorXd shift;       ///< -A^{-1} b
    double c_reduced = 0.0;      ///< c - b.A^{-1}b / 2
    AnisotropyVec aniso;         ///< a_i = 1 / lambda_i

    /// Maps a point of the reduced frame back to original coordinates.
    Eigen::VectorXd to_original(const Eigen::VectorXd& y) const { return Q * y + shift; }
};

/// sigma_k(lambda(A)) == C(d,k) within relative tol.
bool is_admissible(const ProblemSpec& spec, double tol = 1e-8);

/// Validates shapes, positive definiteness and admissibility, then reduces.
ReducedProblem reduce(const ProblemSpec& spec, double admissibility_tol = 1e-8);

}  // namespace serrin
