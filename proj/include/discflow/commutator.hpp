#ifndef DISCFLOW_COMMUTATOR_HPP
#define DISCFLOW_COMMUTATOR_HPP

#include <cmath>
#include <functional>

#include "elliptic.hpp"
#include "greens.hpp"

namespace discflow {

struct center_singularity_error : singularity_error {
    using singularity_error::singularity_error;
};

// Auxiliary points of the commutator bound: the reflected disc-plane point
// w(x) = phi(x)/|phi(x)|^2 and the physical wall point x' = psi(phi(x)/|phi(x)|).
struct SpecialPoints {
    Vec2 z;       // phi(x)
    double abs_phi = 0.0;
    Vec2 w;       // disc-plane reflection, |w| = 1/|phi(x)|
    Vec2 x_prime; // physical boundary point
};

inline SpecialPoints special_points_z(const ConformalMap& map, Vec2 z) {
    const double r = z.norm();
    if (r < 1e-8) throw center_singularity_error("special_points: phi(x) at disc center");
    SpecialPoints sp;
    sp.z = z;
    sp.abs_phi = r;
    sp.w = z / (r * r);
    sp.x_prime = Vec2(map.psi((z / r).as_complex()));
    return sp;
}

inline SpecialPoints special_points(const ConformalMap& map, Vec2 x) {
    return special_points_z(map, map.inverse_point(x));
}

// d_i w_k(x) for w(x) = phi(x)/|phi(x)|^2, given z = phi(x) and Mx = grad phi(x).
inline Mat2 reflected_gradient(const Mat2& Mx, Vec2 z) {
    const double r2 = z.norm2();
    Mat2 dw;
    for (int k = 0; k < 2; ++k) {
        const double zk = (k == 0) ? z.x : z.y;
        for (int i = 0; i < 2; ++i) {
            const double zdM = z.x * Mx(0, i) + z.y * Mx(1, i);
            dw(k, i) = Mx(k, i) / r2 - 2.0 * zk * zdM / (r2 * r2);
        }
    }
    return dw;
}

// Lambda_{i,j}(phi(y), v(x)) = (d_{x_i} d_{y_j} + d_{y_i} d_{y_j}) log|phi(y) - v(x)|
// as the expanded closed form: a second-derivative-of-phi term, a gradient
// difference term, and a rank-one quartic term. zy = phi(y); dv(k,i) = d_i v_k.
inline Mat2 lambda_matrix(const ConformalMap& map, Vec2 zy, Vec2 v, const Mat2& dv) {
    const Vec2 d = zy - v;
    const double q = d.norm2();
    if (q < 1e-28) throw singularity_error("lambda_matrix: phi(y) coincides with v");
    const Mat2 My = ConformalMap::gradient_from_dphi(map.dphi_at(zy.as_complex()));
    const Complex h = map.ddphi_at(zy.as_complex());
    // d_i d_j phi_k(y): holomorphic second-derivative pattern
    const double hij[2][2][2] = {{{h.real(), h.imag()}, {-h.imag(), h.real()}},
                                 {{-h.imag(), h.real()}, {-h.real(), -h.imag()}}};
    const double dk[2] = {d.x, d.y};
    double a[2], b[2]; // a_i = (v - zy)_k (dv - My)(k,i); b_j = (zy - v)_k My(k,j)
    for (int i = 0; i < 2; ++i) {
        a[i] = 0.0;
        b[i] = 0.0;
        for (int k = 0; k < 2; ++k) {
            a[i] += -dk[k] * (dv(k, i) - My(k, i));
            b[i] += dk[k] * My(k, i);
        }
    }
    Mat2 out;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            double t1 = 0.0, t2 = 0.0;
            for (int k = 0; k < 2; ++k) {
                t1 += dk[k] * hij[j][i][k];
                t2 += My(k, j) * (My(k, i) - dv(k, i));
            }
            out(i, j) = t1 / q + t2 / q - 2.0 * a[i] * b[j] / (q * q);
        }
    }
    return out;
}

// Spec-shaped scalar wrapper working from the physical point y.
inline double kernel_lambda(const ConformalMap& map, int i, int j, Vec2 y, Vec2 v,
                            const Mat2& dv) {
    if (i < 0 || i > 1 || j < 0 || j > 1)
        throw std::invalid_argument("kernel_lambda: indices must be 0 or 1");
    return lambda_matrix(map, map.inverse_point(y), v, dv)(i, j);
}

struct CommutatorBreakdown {
    double J_direct = 0.0;
    double J1 = 0.0, J2 = 0.0, J3 = 0.0;
    double rhs_order1 = 0.0;      // int rho |u|^2 / |x-y|
    double rhs_comm_x = 0.0;      // int |u(x)-u(y)| / |x-y|^2 rho |u|
    double rhs_comm_xprime = 0.0; // same with the wall point x'
    double ratio = 0.0;           // |J_direct| / (sum of the three)
    bool xprime_branch = false;   // |phi(x)| > 3/4, the regime of the wall-point bound
    SpecialPoints points;
};

// Field callables receive both the physical point and its disc coordinates so
// quadrature loops never invert the map.
using ScalarFn = std::function<double(Vec2 x, Vec2 z)>;
using VectorFn = std::function<Vec2(Vec2 x, Vec2 z)>;

// Evaluate J and its three-way split at the probe x with the shared
// singular-patch quadrature:
//   J_direct = int [d_{x_i} d_{y_j} Ntil u_i(x) + d_{y_i} d_{y_j} Ntil u_i(y)] rho u_j dy
//   J1 = int d_{x_i} d_{y_j} Ntil [u_i(x) - u_i(y)] rho u_j dy
//   J2, J3 = -(1/2pi) int Lambda_{i,j}(phi(y), v) rho u_i u_j dy,  v = phi(x), w(x).
// The split is exact node-by-node, so J1+J2+J3 = J_direct to rounding.
inline CommutatorBreakdown commutator_breakdown(const DiscGrid& g, const ScalarFn& rho,
                                                const VectorFn& u, Vec2 x) {
    const ConformalMap& map = g.map();
    const Vec2 zx = map.inverse_point(x);
    CommutatorBreakdown out;
    out.points = special_points_z(map, zx);
    out.xprime_branch = out.points.abs_phi > 0.75;
    const Mat2 Mx = ConformalMap::gradient_from_dphi(map.dphi_at(zx.as_complex()));
    const Mat2 Dw = reflected_gradient(Mx, zx);
    const Vec2 ux = u(x, zx);
    const Vec2 zb = zx / out.points.abs_phi;
    const Vec2 uxp = u(out.points.x_prime, zb);
    const double inv2pi = 1.0 / (2.0 * M_PI);

    singular_patch_quadrature(g, x, zx, 3.0, 8, [&](int /*c*/, Vec2 zy, Vec2 y, double wq) {
        const double ry = rho(y, zy);
        const Vec2 uy = u(y, zy);
        const KernelEval k = pullback_kernel_z(map, zx, zy);
        const Mat2 L2 = lambda_matrix(map, zy, zx, Mx);
        const Mat2 L3 = lambda_matrix(map, zy, out.points.w, Dw);
        const double uxv[2] = {ux.x, ux.y}, uyv[2] = {uy.x, uy.y};
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                const double ruj = ry * uyv[j] * wq;
                out.J_direct += (k.hess_xy(i, j) * uxv[i] + k.hess_yy(i, j) * uyv[i]) * ruj;
                out.J1 += k.hess_xy(i, j) * (uxv[i] - uyv[i]) * ruj;
                out.J2 += -inv2pi * L2(i, j) * uyv[i] * ruj;
                out.J3 += -inv2pi * L3(i, j) * uyv[i] * ruj;
            }
        }
        const double dx = (x - y).norm();
        const double dxp = (out.points.x_prime - y).norm();
        const double au = uy.norm();
        out.rhs_order1 += ry * au * au / dx * wq;
        out.rhs_comm_x += (ux - uy).norm() / (dx * dx) * ry * au * wq;
        out.rhs_comm_xprime += (uxp - uy).norm() / (dxp * dxp) * ry * au * wq;
    });
    const double total = out.rhs_order1 + out.rhs_comm_x + out.rhs_comm_xprime;
    out.ratio = total > 0.0 ? std::abs(out.J_direct) / total : 0.0;
    return out;
}

} // namespace discflow

#endif
