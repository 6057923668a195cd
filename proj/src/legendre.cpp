#include "serrin/legendre.hpp"

#include "serrin/errors.hpp"
#include "serrin/symfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace serrin {

namespace {

// value, three gradient components and six Hessian entries, interpolated together
struct LocalModel {
    double value = 0.0;
    Eigen::Vector3d grad = Eigen::Vector3d::Zero();
    Eigen::Matrix3d hess = Eigen::Matrix3d::Zero();
};

class FieldInterpolator {
public:
    explicit FieldInterpolator(const SampledConvexFn& f, double extrap = 0.0)
        : f_(f), interp_(f.grid) {
        interp_.set_extrapolation(extrap);
        const std::size_t n = f.value.size();
        comps_.assign(9, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i) {
            for (int a = 0; a < 3; ++a) comps_[static_cast<std::size_t>(a)][i] = f.gradient[i](a);
            int s = 3;
            for (int a = 0; a < 3; ++a)
                for (int b = a; b < 3; ++b) comps_[static_cast<std::size_t>(s++)][i] = f.hessian[i](a, b);
        }
    }

    double inner_limit() const { return interp_.inner_limit(); }
    double outer_limit() const { return interp_.outer_limit(); }

    bool eval(const Eigen::Vector3d& x, LocalModel& out) {
        if (!interp_.locate(x)) return false;
        out.value = interp_.eval(f_.value);
        for (int a = 0; a < 3; ++a) out.grad(a) = interp_.eval(comps_[static_cast<std::size_t>(a)]);
        int s = 3;
        for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b) {
                out.hess(a, b) = interp_.eval(comps_[static_cast<std::size_t>(s++)]);
                out.hess(b, a) = out.hess(a, b);
            }
        return true;
    }

private:
    const SampledConvexFn& f_;
    GridInterpolator interp_;
    std::vector<std::vector<double>> comps_;
};

Eigen::Vector3d clamp_radius(double lo, double hi, const Eigen::Vector3d& x) {
    const double r = x.norm();
    if (r < lo) return x * (lo / r);
    if (r > hi) return x * (hi / r);
    return x;
}

}  // namespace

void SampledConvexFn::differentiate() {
    const auto& g = grid;
    if (value.size() != g.size()) throw DomainError("sample count does not match the grid");
    gradient.assign(g.size(), Eigen::Vector3d::Zero());
    hessian.assign(g.size(), Eigen::Matrix3d::Zero());
    convexity_certificate = std::numeric_limits<double>::infinity();
    Stencil st;
    for (int i = 0; i < g.n_r(); ++i)
        for (int j = 0; j < g.n_theta(); ++j) {
            const auto hc = frame_hessian_coefficients(g.r(i), g.sin_theta(j), g.cos_theta(j));
            for (int m = 0; m < g.n_phi(); ++m) {
                build_stencil(g, i, j, m, st);
                const auto d = st.apply(value);
                const std::size_t n = g.index(i, j, m);
                gradient[n] = cartesian_gradient(g, i, j, m, d);
                const Eigen::Matrix3d E = g.frame(j, m);
                hessian[n] = E * frame_hessian(d, hc) * E.transpose();
                if (i > 0 && i < g.n_r() - 1) {
                    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(hessian[n], Eigen::EigenvaluesOnly);
                    convexity_certificate = std::min(convexity_certificate, es.eigenvalues()(0));
                }
            }
        }
}

SampledConvexFn SampledConvexFn::sample(const SphericalGrid& grid,
                                        const std::function<double(const Eigen::Vector3d&)>& f) {
    SampledConvexFn s;
    s.grid = grid;
    s.value.resize(grid.size());
    for (int i = 0; i < grid.n_r(); ++i)
        for (int j = 0; j < grid.n_theta(); ++j)
            for (int m = 0; m < grid.n_phi(); ++m) s.value[grid.index(i, j, m)] = f(grid.point(i, j, m));
    s.differentiate();
    return s;
}

SampledConvexFn legendre_transform(const SampledConvexFn& f, const SphericalGrid& targets,
                                   const TransformOptions& opt) {
    if (!(f.convexity_certificate > 0.0)) {
        throw ConvexityError("sampled function is not strictly convex (certificate " +
                             std::to_string(f.convexity_certificate) + ")");
    }
    const auto& g = f.grid;
    FieldInterpolator interp(f, opt.boundary_cells);
    const double lo = interp.inner_limit(), hi = interp.outer_limit();
    SampledConvexFn out;
    out.grid = targets;
    out.value.resize(targets.size());
    out.matched.resize(targets.size());

    // coarse candidates for the supremum scan: (x, u(x)) at every stride-th node
    std::vector<std::size_t> cand;
    for (int i = 0; i < g.n_r(); i += opt.scan_stride)
        for (int j = 0; j < g.n_theta(); j += opt.scan_stride)
            for (int m = 0; m < g.n_phi(); m += opt.scan_stride) cand.push_back(g.index(i, j, m));

    auto newton = [&](const Eigen::Vector3d& p, Eigen::Vector3d x, Eigen::Vector3d& xout,
                      LocalModel& lm) {
        const double scale = std::max(1.0, p.norm());
        for (int it = 0; it < opt.max_newton; ++it) {
            if (!interp.eval(x, lm)) return false;
            const Eigen::Vector3d res = lm.grad - p;
            if (res.norm() <= opt.tol * scale) {
                xout = x;
                return true;
            }
            Eigen::Vector3d step = lm.hess.ldlt().solve(-res);
            // damp steps that leave the admissible shell
            Eigen::Vector3d next = x + step;
            for (int h = 0; h < 20 && (next.norm() < lo * (1.0 - 1e-12) ||
                                       next.norm() > hi * (1.0 + 1e-12));
                 ++h) {
                step *= 0.5;
                next = x + step;
            }
            next = clamp_radius(lo, hi, next);
            if ((next - x).norm() <= 1e-15 * std::max(1.0, x.norm())) {
                if (!interp.eval(next, lm)) return false;
                xout = next;
                return (lm.grad - p).norm() <= 1e3 * opt.tol * scale;
            }
            x = next;
        }
        if (!interp.eval(x, lm)) return false;
        xout = x;
        return (lm.grad - p).norm() <= 1e3 * opt.tol * scale;
    };

    Eigen::Vector3d prev = Eigen::Vector3d::Zero();
    bool have_prev = false;
    for (int i = 0; i < targets.n_r(); ++i)
        for (int j = 0; j < targets.n_theta(); ++j)
            for (int m = 0; m < targets.n_phi(); ++m) {
                const Eigen::Vector3d p = targets.point(i, j, m);
                const std::size_t n = targets.index(i, j, m);
                LocalModel lm;
                Eigen::Vector3d x;
                // seed: the nodal x whose gradient is closest to p is cheap and usually enough
                bool ok = false;
                if (have_prev) ok = newton(p, prev, x, lm);
                if (!ok) {
                    double best = -std::numeric_limits<double>::infinity();
                    std::size_t arg = cand.front();
                    for (std::size_t c : cand) {
                        const int ci = static_cast<int>(c / (static_cast<std::size_t>(g.n_theta()) * g.n_phi()));
                        const int cj = static_cast<int>((c / static_cast<std::size_t>(g.n_phi())) % static_cast<std::size_t>(g.n_theta()));
                        const int cm = static_cast<int>(c % static_cast<std::size_t>(g.n_phi()));
                        const double v = p.dot(g.point(ci, cj, cm)) - f.value[c];
                        if (v > best) {
                            best = v;
                            arg = c;
                        }
                    }
                    const int ci = static_cast<int>(arg / (static_cast<std::size_t>(g.n_theta()) * g.n_phi()));
                    const int cj = static_cast<int>((arg / static_cast<std::size_t>(g.n_phi())) % static_cast<std::size_t>(g.n_theta()));
                    const int cm = static_cast<int>(arg % static_cast<std::size_t>(g.n_phi()));
                    ok = newton(p, g.point(ci, cj, cm), x, lm);
                }
                if (!ok) {
                    throw ImageError("target p = (" + std::to_string(p.x()) + ", " +
                                     std::to_string(p.y()) + ", " + std::to_string(p.z()) +
                                     ") is outside the gradient image");
                }
                out.matched[n] = x;
                out.value[n] = p.dot(x) - lm.value;
                prev = x;
                have_prev = true;
            }
    out.differentiate();
    return out;
}

GradientImage gradient_image_boundary(const SampledConvexFn& f) {
    const auto& g = f.grid;
    GradientImage gi;
    gi.inner_radius_min = std::numeric_limits<double>::infinity();
    gi.outer_reach = std::numeric_limits<double>::infinity();
    for (int j = 0; j < g.n_theta(); ++j)
        for (int m = 0; m < g.n_phi(); ++m) {
            const Eigen::Vector3d v = f.gradient[g.index(0, j, m)];
            gi.inner.push_back(v);
            gi.inner_radius_min = std::min(gi.inner_radius_min, v.norm());
            gi.inner_radius_max = std::max(gi.inner_radius_max, v.norm());
            gi.outer_reach = std::min(gi.outer_reach, f.gradient[g.index(g.n_r() - 1, j, m)].norm());
        }
    return gi;
}

double hessian_inverse_check(const SampledConvexFn& f, const SampledConvexFn& fstar) {
    if (fstar.matched.size() != fstar.value.size()) {
        throw DomainError("hessian_inverse_check needs a transform with matched points");
    }
    FieldInterpolator interp(f);
    const auto& g = fstar.grid;
    double worst = 0.0;
    for (int i = 1; i < g.n_r() - 1; ++i)
        for (int j = 0; j < g.n_theta(); ++j)
            for (int m = 0; m < g.n_phi(); ++m) {
                const std::size_t n = g.index(i, j, m);
                LocalModel lm;
                if (!interp.eval(fstar.matched[n], lm)) continue;
                const Eigen::Matrix3d diff = fstar.hessian[n] - lm.hess.inverse();
                Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(0.5 * (diff + diff.transpose()),
                                                                  Eigen::EigenvaluesOnly);
                worst = std::max(worst, es.eigenvalues().cwiseAbs().maxCoeff());
            }
    return worst;
}

double robin_check(const SampledConvexFn& fstar) {
    const auto& g = fstar.grid;
    double worst = 0.0;
    Stencil st;
    for (int j = 0; j < g.n_theta(); ++j)
        for (int m = 0; m < g.n_phi(); ++m) {
            build_stencil(g, 0, j, m, st);
            const auto d = st.apply(fstar.value);
            worst = std::max(worst, std::abs(fstar.value[g.index(0, j, m)] - d[Dr]));
        }
    return worst;
}

double quotient_residual(const SampledConvexFn& fstar, int k, double target) {
    const auto& g = fstar.grid;
    double worst = 0.0;
    for (int i = 1; i < g.n_r() - 1; ++i)
        for (int j = 0; j < g.n_theta(); ++j)
            for (int m = 0; m < g.n_phi(); ++m) {
                const auto lam = spectrum(SymMatrix::from_dense(fstar.hessian[g.index(i, j, m)]));
                const double q = sigma_k(lam, 3) / sigma_k(lam.values(), 3 - k);
                worst = std::max(worst, std::abs(q - target));
            }
    return worst;
}

double sigma_residual(const SampledConvexFn& f, int k, double target) {
    const auto& g = f.grid;
    double worst = 0.0;
    for (int i = 1; i < g.n_r() - 1; ++i)
        for (int j = 0; j < g.n_theta(); ++j)
            for (int m = 0; m < g.n_phi(); ++m) {
                const auto lam = spectrum(SymMatrix::from_dense(f.hessian[g.index(i, j, m)]));
                worst = std::max(worst, std::abs(sigma_k(lam, k) - target));
            }
    return worst;
}

FenchelYoung fenchel_young(const SampledConvexFn& f, const SampledConvexFn& fstar, int stride) {
    FenchelYoung fy;
    fy.min_gap = std::numeric_limits<double>::infinity();
    const auto& g = f.grid;
    const auto& h = fstar.grid;
    FieldInterpolator interp(f);
    for (int i = 0; i < h.n_r(); ++i)
        for (int j = 0; j < h.n_theta(); ++j)
            for (int m = 0; m < h.n_phi(); ++m) {
                const std::size_t n = h.index(i, j, m);
                const Eigen::Vector3d p = h.point(i, j, m);
                if (!fstar.matched.empty()) {
                    LocalModel lm;
                    if (interp.eval(fstar.matched[n], lm)) {
                        fy.matched_gap = std::max(
                            fy.matched_gap, std::abs(lm.value + fstar.value[n] - p.dot(fstar.matched[n])));
                    }
                }
                if ((i + j + m) % stride != 0) continue;
                for (int a = 0; a < g.n_r(); a += stride)
                    for (int b = 0; b < g.n_theta(); b += stride)
                        for (int c = 0; c < g.n_phi(); c += stride) {
                            const double gap = f.value[g.index(a, b, c)] + fstar.value[n] -
                                               p.dot(g.point(a, b, c));
                            fy.min_gap = std::min(fy.min_gap, gap);
                        }
            }
    return fy;
}

}  // namespace serrin
