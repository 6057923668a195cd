#include "serrin/problem.hpp"

#include <cmath>
#include <string>

namespace serrin {

ProblemSpec ProblemSpec::isotropic(int d, int k, double c) {
    ProblemSpec s;
    s.d = d;
    s.k = k;
    s.A = SymMatrix::identity(static_cast<std::size_t>(d));
    s.b.assign(static_cast<std::size_t>(d), 0.0);
    s.c = c;
    return s;
}

ProblemSpec ProblemSpec::diagonal(std::vector<double> lambda, int k, double c) {
    ProblemSpec s;
    s.d = static_cast<int>(lambda.size());
    s.k = k;
    s.A = SymMatrix::diagonal(lambda);
    s.b.assign(lambda.size(), 0.0);
    s.c = c;
    return s;
}

bool is_admissible(const ProblemSpec& spec, double tol) {
    const auto lam = spectrum(spec.A);
    if (!(lam.min() > 0.0)) return false;
    const double target = binomial(spec.d, spec.k);
    return std::abs(sigma_k(lam, spec.k) - target) <= tol * target;
}

ReducedProblem reduce(const ProblemSpec& spec, double admissibility_tol) {
    if (spec.d < 2) throw DomainError("dimension must be at least 2");
    if (spec.k < 1 || spec.k > spec.d) throw DomainError("order k must satisfy 1 <= k <= d");
    if (static_cast<int>(spec.A.dim()) != spec.d) {
        throw DomainError("A is " + std::to_string(spec.A.dim()) + "x" +
                          std::to_string(spec.A.dim()) + " but d = " + std::to_string(spec.d));
    }
    if (!spec.b.empty() && static_cast<int>(spec.b.size()) != spec.d) {
        throw DomainError("b has " + std::to_string(spec.b.size()) + " entries, expected " +
                          std::to_string(spec.d));
    }
    const auto ed = eigen_decompose(spec.A);
    if (!(ed.lambda.min() > 0.0)) throw AdmissibilityError("A must be positive definite");
    const double target = binomial(spec.d, spec.k);
    const double sk = sigma_k(ed.lambda, spec.k);
    if (std::abs(sk - target) > admissibility_tol * target) {
        throw AdmissibilityError("sigma_k(lambda(A)) = " + std::to_string(sk) +
                                 " but admissibility needs C(d,k) = " + std::to_string(target));
    }

    ReducedProblem r;
    r.original = spec;
    r.Q = ed.vectors;
    const auto vals = ed.lambda.values();
    r.lambda.assign(vals.begin(), vals.end());

    Eigen::VectorXd b = Eigen::VectorXd::Zero(spec.d);
    for (std::size_t i = 0; i < spec.b.size(); ++i) b(static_cast<Eigen::Index>(i)) = spec.b[i];
    // A^{-1} b through the eigenbasis
    Eigen::VectorXd qb = r.Q.transpose() * b;
    for (Eigen::Index i = 0; i < qb.size(); ++i) qb(i) /= r.lambda[static_cast<std::size_t>(i)];
    const Eigen::VectorXd ainv_b = r.Q * qb;
    r.shift = -ainv_b;
    r.c_reduced = spec.c - 0.5 * b.dot(ainv_b);

    std::vector<double> a(r.lambda.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = 1.0 / r.lambda[i];
    r.aniso = AnisotropyVec::make(std::move(a), spec.k);
    return r;
}

}  // namespace serrin
