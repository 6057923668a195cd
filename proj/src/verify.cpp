#include "serrin/verify.hpp"

#include "serrin/errors.hpp"
#include "serrin/symfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace serrin {

namespace {

double min_eigenvalue(const Eigen::Matrix3d& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

// tangential block of a Cartesian matrix in (e_theta, e_phi)
Eigen::Matrix2d tangential_block(const SphericalGrid& g, int j, int m, const Eigen::Matrix3d& H) {
    const Eigen::Matrix3d E = g.frame(j, m);
    Eigen::Matrix<double, 3, 2> T = E.rightCols<2>();
    Eigen::Matrix2d W = T.transpose() * H * T;
    return 0.5 * (W + W.transpose());
}

// (theta^2)-extrapolation of ring means to the pole
Eigen::Vector3d pole_vertex(const PrimalSamples& pr, bool north) {
    const auto& g = pr.grid;
    const int j0 = north ? 0 : g.n_theta() - 1;
    const int j1 = north ? 1 : g.n_theta() - 2;
    Eigen::Vector3d f0 = Eigen::Vector3d::Zero(), f1 = Eigen::Vector3d::Zero();
    for (int m = 0; m < g.n_phi(); ++m) {
        f0 += pr.x[g.index(0, j0, m)];
        f1 += pr.x[g.index(0, j1, m)];
    }
    f0 /= g.n_phi();
    f1 /= g.n_phi();
    const double t0 = 0.5 * g.dtheta(), t1 = 1.5 * g.dtheta();
    return (t1 * t1 * f0 - t0 * t0 * f1) / (t1 * t1 - t0 * t0);
}

// Du at (0, j, m) from the samples alone: differentiate u and x along the grid directions and
// solve J^T Du = (u_r, u_theta, u_phi) with J = (x_r, x_theta, x_phi)
Eigen::Vector3d chain_rule_gradient(const PrimalSamples& pr, int j, int m) {
    const auto& g = pr.grid;
    Stencil st;
    build_stencil(g, 0, j, m, st);
    Eigen::Vector3d du = Eigen::Vector3d::Zero();
    Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
    const int q[3] = {Dr, Dt, Dp};
    for (int s = 0; s < st.count; ++s) {
        const std::size_t n = st.nodes[static_cast<std::size_t>(s)];
        for (int c = 0; c < 3; ++c) {
            const double w = st.w[static_cast<std::size_t>(q[c])][static_cast<std::size_t>(s)];
            du(c) += w * pr.u[n];
            J.col(c) += w * pr.x[n];
        }
    }
    return J.transpose().fullPivLu().solve(du);
}

}  // namespace

SampledConvexFn dual_samples(const AnnulusField& field) {
    SampledConvexFn s;
    s.grid = field.grid;
    s.value = field.u;
    s.differentiate();
    return s;
}

PrimalSamples pull_back(const SampledConvexFn& dual) {
    const auto& g = dual.grid;
    PrimalSamples pr;
    pr.grid = g;
    pr.x.resize(g.size());
    pr.u.resize(g.size());
    pr.hessian.resize(g.size());
    pr.outer_reach = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.n_r(); ++i)
        for (int j = 0; j < g.n_theta(); ++j)
            for (int m = 0; m < g.n_phi(); ++m) {
                const std::size_t n = g.index(i, j, m);
                const double lmin = min_eigenvalue(dual.hessian[n]);
                if (!(lmin > 0.0)) {
                    throw ConvexityError("dual Hessian is not positive definite at node (" +
                                         std::to_string(i) + ", " + std::to_string(j) + ", " +
                                         std::to_string(m) + ")");
                }
                const Eigen::Vector3d p = g.point(i, j, m);
                pr.x[n] = dual.gradient[n];
                pr.u[n] = p.dot(pr.x[n]) - dual.value[n];
                pr.hessian[n] = dual.hessian[n].inverse();
                if (i == g.n_r() - 1) pr.outer_reach = std::min(pr.outer_reach, pr.x[n].norm());
            }
    return pr;
}

FreeBoundary extract_free_boundary(const SampledConvexFn& dual, const PrimalSamples& pr) {
    const auto& g = pr.grid;
    const int nt = g.n_theta(), np = g.n_phi();
    FreeBoundary fb;
    fb.vertices.reserve(static_cast<std::size_t>(nt * np + 2));
    for (int j = 0; j < nt; ++j)
        for (int m = 0; m < np; ++m) fb.vertices.push_back(pr.x[g.index(0, j, m)]);
    const int north = nt * np, south = north + 1;
    fb.vertices.push_back(pole_vertex(pr, true));
    fb.vertices.push_back(pole_vertex(pr, false));

    auto vid = [np](int j, int m) { return j * np + ((m % np) + np) % np; };
    for (int j = 0; j + 1 < nt; ++j)
        for (int m = 0; m < np; ++m) {
            fb.triangles.push_back({vid(j, m), vid(j + 1, m), vid(j + 1, m + 1)});
            fb.triangles.push_back({vid(j, m), vid(j + 1, m + 1), vid(j, m + 1)});
        }
    for (int m = 0; m < np; ++m) {
        fb.triangles.push_back({north, vid(0, m), vid(0, m + 1)});
        fb.triangles.push_back({south, vid(nt - 1, m + 1), vid(nt - 1, m)});
    }

    Eigen::Vector3d centre = Eigen::Vector3d::Zero();
    for (const auto& v : fb.vertices) centre += v;
    centre /= static_cast<double>(fb.vertices.size());

    std::map<std::pair<int, int>, int> edges;
    double vol6 = 0.0;
    for (auto& t : fb.triangles) {
        Eigen::Vector3d a = fb.vertices[static_cast<std::size_t>(t[0])];
        Eigen::Vector3d b = fb.vertices[static_cast<std::size_t>(t[1])];
        Eigen::Vector3d c = fb.vertices[static_cast<std::size_t>(t[2])];
        Eigen::Vector3d n = (b - a).cross(c - a);
        if (n.dot((a + b + c) / 3.0 - centre) < 0.0) {
            std::swap(t[1], t[2]);
            std::swap(b, c);
            n = -n;
        }
        const double area2 = n.norm();
        fb.facet_area.push_back(0.5 * area2);
        fb.facet_normal.push_back(area2 > 0.0 ? Eigen::Vector3d(n / area2) : Eigen::Vector3d::Zero());
        fb.area += 0.5 * area2;
        vol6 += a.dot(b.cross(c));
        for (int e = 0; e < 3; ++e) {
            int u = t[static_cast<std::size_t>(e)], v = t[static_cast<std::size_t>((e + 1) % 3)];
            if (u > v) std::swap(u, v);
            ++edges[{u, v}];
        }
    }
    fb.volume = vol6 / 6.0;
    fb.closed = std::all_of(edges.begin(), edges.end(), [](const auto& e) { return e.second == 2; });
    fb.euler = static_cast<int>(fb.vertices.size()) - static_cast<int>(edges.size()) +
               static_cast<int>(fb.triangles.size());
    if (!fb.closed || fb.euler != 2) {
        throw TopologyError("free boundary mesh is not a closed sphere (Euler characteristic " +
                            std::to_string(fb.euler) + ")");
    }

    fb.radius_min = std::numeric_limits<double>::infinity();
    fb.min_support = std::numeric_limits<double>::infinity();
    fb.min_support_hessian = std::numeric_limits<double>::infinity();
    for (int j = 0; j < nt; ++j)
        for (int m = 0; m < np; ++m) {
            const std::size_t n = g.index(0, j, m);
            const double u = pr.u[n];
            const double gn = chain_rule_gradient(pr, j, m).norm();
            fb.u_vertex.push_back(u);
            fb.grad_norm.push_back(gn);
            fb.max_abs_u = std::max(fb.max_abs_u, std::abs(u));
            fb.max_grad_dev = std::max(fb.max_grad_dev, std::abs(gn - 1.0));
            const double rad = pr.x[n].norm();
            fb.radius_min = std::min(fb.radius_min, rad);
            fb.radius_max = std::max(fb.radius_max, rad);
            fb.min_support = std::min(fb.min_support, pr.x[n].dot(g.unit(j, m)));
            const Eigen::Matrix2d W = tangential_block(g, j, m, dual.hessian[n]);
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(W, Eigen::EigenvaluesOnly);
            fb.min_support_hessian = std::min(fb.min_support_hessian, es.eigenvalues()(0));
        }
    return fb;
}

Recovery recover_primal(const AnnulusField& field) {
    Recovery rec;
    rec.dual = dual_samples(field);
    rec.primal = pull_back(rec.dual);
    rec.boundary = extract_free_boundary(rec.dual, rec.primal);
    return rec;
}

double equation_residual_primal(const PrimalSamples& primal, int k) {
    const auto& g = primal.grid;
    const double target = binomial(3, k);
    double worst = 0.0;
    for (int i = 1; i < g.n_r() - 1; ++i)
        for (int j = 0; j < g.n_theta(); ++j)
            for (int m = 0; m < g.n_phi(); ++m) {
                const auto lam = spectrum(SymMatrix::from_dense(primal.hessian[g.index(i, j, m)]));
                worst = std::max(worst, std::abs(sigma_k(lam, k) - target));
            }
    return worst;
}

DecayFit decay_fit(std::span<const double> r, std::span<const double> g, double r_lo, double r_hi,
                   bool allow_half) {
    if (r.size() != g.size()) throw DomainError("decay_fit: radius and value counts differ");
    const double min_ratio = allow_half ? std::sqrt(10.0) : 10.0;
    if (!(r_lo > 0.0) || !(r_hi >= r_lo * min_ratio * (1.0 - 1e-12))) {
        throw WindowError("decay window [" + std::to_string(r_lo) + ", " + std::to_string(r_hi) +
                          "] spans less than " + (allow_half ? "half a decade" : "a decade"));
    }
    DecayFit fit;
    fit.r_lo = r_lo;
    fit.r_hi = r_hi;
    double scale = 0.0;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] < r_lo || r[i] > r_hi) continue;
        scale = std::max(scale, std::abs(g[i]));
        if (std::abs(g[i]) > 0.0) {
            lx.push_back(std::log(r[i]));
            ly.push_back(std::log(std::abs(g[i])));
        }
    }
    fit.samples = static_cast<int>(lx.size());
    if (lx.size() < 3) throw WindowError("decay window holds fewer than three usable samples");
    if (scale < 1e-13) {
        fit.degenerate = true;
        return fit;
    }
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    const double slope = sxy / sxx;
    fit.beta = -slope;
    fit.C = std::exp(my - slope * mx);
    double ss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double e = ly[i] - (my + slope * (lx[i] - mx));
        ss += e * e;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

namespace {

template <class Dev>
std::pair<std::vector<double>, std::vector<double>> envelope(const SphericalGrid& g,
                                                            double keep_fraction, Dev dev) {
    std::vector<double> rad, val;
    const double cap = g.r_inner() + keep_fraction * (g.r_outer() - g.r_inner());
    for (int i = 0; i < g.n_r(); ++i) {
        if (g.r(i) > cap * (1.0 + 1e-14)) break;
        double rsum = 0.0, worst = 0.0;
        for (int j = 0; j < g.n_theta(); ++j)
            for (int m = 0; m < g.n_phi(); ++m) {
                const auto [rr, v] = dev(i, j, m);
                rsum += rr;
                worst = std::max(worst, v);
            }
        rad.push_back(rsum / (g.n_theta() * g.n_phi()));
        val.push_back(worst);
    }
    return {rad, val};
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> primal_deviation_envelope(
    const PrimalSamples& pr, std::span<const double> a, double c, double keep_fraction) {
    return envelope(pr.grid, keep_fraction, [&](int i, int j, int m) {
        const std::size_t n = pr.grid.index(i, j, m);
        const Eigen::Vector3d& x = pr.x[n];
        double q = 0.0;
        for (int s = 0; s < 3; ++s) q += 0.5 * x(s) * x(s) / a[static_cast<std::size_t>(s)];
        return std::pair{x.norm(), std::abs(pr.u[n] - q - c)};
    });
}

std::pair<std::vector<double>, std::vector<double>> dual_deviation_envelope(
    const SampledConvexFn& dual, std::span<const double> a, double c, double keep_fraction) {
    const auto& g = dual.grid;
    return envelope(g, keep_fraction, [&](int i, int j, int m) {
        const Eigen::Vector3d p = g.point(i, j, m);
        double q = 0.0;
        for (int s = 0; s < 3; ++s) q += 0.5 * a[static_cast<std::size_t>(s)] * p(s) * p(s);
        return std::pair{g.r(i), std::abs(dual.value[g.index(i, j, m)] - q + c)};
    });
}

std::pair<std::vector<double>, std::vector<double>> hessian_deviation_envelope(
    const PrimalSamples& pr, std::span<const double> a, double keep_fraction) {
    Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
    for (int s = 0; s < 3; ++s) A(s, s) = 1.0 / a[static_cast<std::size_t>(s)];
    return envelope(pr.grid, keep_fraction, [&](int i, int j, int m) {
        const std::size_t n = pr.grid.index(i, j, m);
        const Eigen::Matrix3d D = pr.hessian[n] - A;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(0.5 * (D + D.transpose()), Eigen::EigenvaluesOnly);
        return std::pair{pr.x[n].norm(), es.eigenvalues().cwiseAbs().maxCoeff()};
    });
}

const IdentityEntry* IdentityReport::find(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return &e;
    return nullptr;
}

nlohmann::json IdentityReport::to_json() const {
    nlohmann::json j;
    j["identities"] = nlohmann::json::array();
    for (const auto& e : entries) {
        j["identities"].push_back({{"identity", e.name},
                                   {"lhs", e.lhs},
                                   {"rhs", e.rhs},
                                   {"gap", e.gap},
                                   {"tolerance", e.tolerance},
                                   {"pass", e.pass}});
    }
    j["min_x_dot_nu"] = min_x_dot_nu;
    j["enclosed_volume"] = enclosed_volume;
    j["boundary_area"] = boundary_area;
    return j;
}

IdentityReport rigidity_identities(const SampledConvexFn& dual, int k, double c,
                                   const IdentityTolerances& tol) {
    if (k < 1 || k > 3) throw DomainError("rigidity identities need 1 <= k <= 3");
    const auto& g = dual.grid;
    const int nt = g.n_theta(), np = g.n_phi();
    std::vector<double> detw(static_cast<std::size_t>(nt * np)), vol(detw.size()), curv(detw.size());
    IdentityReport rep;
    rep.min_x_dot_nu = std::numeric_limits<double>::infinity();
    for (int j = 0; j < nt; ++j)
        for (int m = 0; m < np; ++m) {
            const std::size_t n = g.index(0, j, m);
            const std::size_t q = g.ring_index(j, m);
            const Eigen::Matrix2d W = tangential_block(g, j, m, dual.hessian[n]);
            const double det = W.determinant();
            const double tr = W.trace();
            detw[q] = det;
            vol[q] = dual.value[n] * det / 3.0;
            curv[q] = k == 1 ? det : (k == 2 ? tr : 1.0);
            rep.min_x_dot_nu = std::min(rep.min_x_dot_nu, dual.gradient[n].dot(g.unit(j, m)));
        }
    rep.boundary_area = sphere_integral(g, detw);
    rep.enclosed_volume = sphere_integral(g, vol);

    IdentityEntry e1{"curvature_volume", sphere_integral(g, curv),
                     k * binomial(3, k) * rep.enclosed_volume, 0.0, tol.curvature, false};
    e1.gap = e1.lhs - e1.rhs;
    e1.pass = std::abs(e1.gap) <= tol.curvature;
    rep.entries.push_back(e1);

    if (k == 1) {
        IdentityEntry e2{"area_volume", rep.boundary_area, 3.0 * rep.enclosed_volume, 0.0, tol.area,
                         false};
        e2.gap = e2.lhs - e2.rhs;
        e2.pass = std::abs(e2.gap) <= tol.area;
        rep.entries.push_back(e2);
    }

    // phi = x.Du - 2u pulled back is 2u* - p.Du*; the Laplacian of u is tr((D^2u*)^{-1})
    double phi_min = std::numeric_limits<double>::infinity();
    double lap_min = std::numeric_limits<double>::infinity();
    double mac_min = std::numeric_limits<double>::infinity();
    const double ck = binomial(3, k);
    for (int i = 0; i < g.n_r(); ++i)
        for (int j = 0; j < nt; ++j)
            for (int m = 0; m < np; ++m) {
                const std::size_t n = g.index(i, j, m);
                const Eigen::Vector3d p = g.point(i, j, m);
                phi_min = std::min(phi_min, 2.0 * dual.value[n] - p.dot(dual.gradient[n]));
                if (i > 0 && i < g.n_r() - 1) {
                    const Eigen::Matrix3d H = dual.hessian[n].inverse();
                    const auto lam = spectrum(SymMatrix::from_dense(H));
                    const double lap = H.trace();
                    lap_min = std::min(lap_min, lap);
                    mac_min = std::min(mac_min, lap - 3.0 * std::pow(sigma_k(lam, k) / ck, 1.0 / k));
                }
            }
    IdentityEntry e3{"phi_positivity", phi_min, 0.0, phi_min, tol.phi, false};
    e3.pass = c >= 0.0 || phi_min >= -tol.phi;
    rep.entries.push_back(e3);
    // Newton-Maclaurin at each sample: Laplacian >= 3 (sigma_k / C(3,k))^{1/k}
    IdentityEntry e4{"maclaurin", mac_min, 0.0, mac_min, tol.maclaurin, false};
    e4.pass = mac_min >= -tol.maclaurin;
    rep.entries.push_back(e4);
    IdentityEntry e5{"laplacian_lower_bound", lap_min, 3.0, lap_min - 3.0, 0.0, true};
    rep.entries.push_back(e5);
    return rep;
}

}  // namespace serrin
