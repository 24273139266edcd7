#ifndef DISCFLOW_GREENS_HPP
#define DISCFLOW_GREENS_HPP

#include <cmath>
#include <stdexcept>

#include "conformal.hpp"
#include "vec.hpp"

namespace discflow {

struct singularity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Pull-back kernel evaluation: value, gradients and the mixed/yy second
// derivative blocks d_{x_i} d_{y_j} N~ and d_{y_i} d_{y_j} N~.
struct KernelEval {
    double value = 0.0;
    Vec2 grad_x, grad_y;
    Mat2 hess_xy, hess_yy;
};

namespace detail {

// Jet of the unit-disc Neumann function
//   N = -(1/4pi) [ log q1 + log q2 ],
//   q1 = |xt-yt|^2,  q2 = |xt|^2 |yt|^2 - 2 xt.yt + 1.
// q2 is the algebraically regularized square of ||xt| yt - xt/|xt||; it is
// smooth and positive for |xt||yt| < 1, in particular at xt = 0.
struct DiscJet {
    double value;
    double dx[2], dy[2];
    double dxdy[2][2], dydy[2][2];
};

inline DiscJet disc_neumann_jet(Vec2 xt, Vec2 yt) {
    const double q1 = (xt - yt).norm2();
    if (q1 < 1e-28) throw singularity_error("disc kernel: coincident points");
    const double ax2 = xt.norm2(), ay2 = yt.norm2();
    const double q2 = ax2 * ay2 - 2.0 * xt.dot(yt) + 1.0;

    const double q1x[2] = {2.0 * (xt.x - yt.x), 2.0 * (xt.y - yt.y)};
    const double q1y[2] = {-q1x[0], -q1x[1]};
    const double q2x[2] = {2.0 * xt.x * ay2 - 2.0 * yt.x, 2.0 * xt.y * ay2 - 2.0 * yt.y};
    const double q2y[2] = {2.0 * ax2 * yt.x - 2.0 * xt.x, 2.0 * ax2 * yt.y - 2.0 * xt.y};
    const double xv[2] = {xt.x, xt.y};
    const double yv[2] = {yt.x, yt.y};

    const double k = -1.0 / (4.0 * M_PI);
    DiscJet out;
    out.value = k * (std::log(q1) + std::log(q2));
    for (int i = 0; i < 2; ++i) {
        out.dx[i] = k * (q1x[i] / q1 + q2x[i] / q2);
        out.dy[i] = k * (q1y[i] / q1 + q2y[i] / q2);
    }
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const double d = (i == j) ? 1.0 : 0.0;
            const double q1xy = -2.0 * d;
            const double q2xy = 4.0 * xv[i] * yv[j] - 2.0 * d;
            const double q1yy = 2.0 * d;
            const double q2yy = 2.0 * ax2 * d;
            out.dxdy[i][j] = k * (q1xy / q1 - q1x[i] * q1y[j] / (q1 * q1) +
                                  q2xy / q2 - q2x[i] * q2y[j] / (q2 * q2));
            out.dydy[i][j] = k * (q1yy / q1 - q1y[i] * q1y[j] / (q1 * q1) +
                                  q2yy / q2 - q2y[i] * q2y[j] / (q2 * q2));
        }
    }
    return out;
}

} // namespace detail

// N(xt, yt) on the unit disc.
inline double disc_kernel(Vec2 xt, Vec2 yt) {
    const double q1 = (xt - yt).norm2();
    if (q1 < 1e-28) throw singularity_error("disc_kernel: coincident points");
    const double q2 = xt.norm2() * yt.norm2() - 2.0 * xt.dot(yt) + 1.0;
    return -1.0 / (4.0 * M_PI) * (std::log(q1) + std::log(q2));
}

// Pull-back kernel N~(x,y) = N(phi(x), phi(y)) with derivatives via the
// analytic chain rule; the caller supplies the disc coordinates zx = phi(x),
// zy = phi(y) (grid loops know them exactly, no Newton inversion needed).
inline KernelEval pullback_kernel_z(const ConformalMap& map, Vec2 zx, Vec2 zy) {
    const detail::DiscJet jet = detail::disc_neumann_jet(zx, zy);
    const Mat2 mx = ConformalMap::gradient_from_dphi(map.dphi_at(zx.as_complex()));
    const Mat2 my = ConformalMap::gradient_from_dphi(map.dphi_at(zy.as_complex()));
    const Complex h = map.ddphi_at(zy.as_complex());
    // d_i d_j phi_k(y): holomorphic second-derivative pattern
    // (i,j) = (0,0) -> h ; (0,1),(1,0) -> i h ; (1,1) -> -h
    const double hij[2][2][2] = {{{h.real(), h.imag()}, {-h.imag(), h.real()}},
                                 {{-h.imag(), h.real()}, {-h.real(), -h.imag()}}};

    KernelEval out;
    out.value = jet.value;
    for (int i = 0; i < 2; ++i) {
        double gx = 0.0, gy = 0.0;
        for (int a = 0; a < 2; ++a) {
            gx += jet.dx[a] * mx(a, i);
            gy += jet.dy[a] * my(a, i);
        }
        (i == 0 ? out.grad_x.x : out.grad_x.y) = gx;
        (i == 0 ? out.grad_y.x : out.grad_y.y) = gy;
    }
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            double sxy = 0.0, syy = 0.0;
            for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b) {
                    sxy += jet.dxdy[a][b] * mx(a, i) * my(b, j);
                    syy += jet.dydy[a][b] * my(a, i) * my(b, j);
                }
            }
            for (int b = 0; b < 2; ++b) syy += jet.dy[b] * hij[i][j][b];
            out.hess_xy(i, j) = sxy;
            out.hess_yy(i, j) = syy;
        }
    }
    return out;
}

inline KernelEval pullback_kernel(const ConformalMap& map, Vec2 x, Vec2 y) {
    if ((x - y).norm() < 1e-14)
        throw singularity_error("pullback_kernel: coincident points");
    return pullback_kernel_z(map, map.inverse_point(x), map.inverse_point(y));
}

// n . grad_y N~(x, y0) at y0 = psi(e^{is}); equals -(1/2pi)|grad phi_1(y0)|
// independently of the interior point x.
inline double boundary_normal_derivative(const ConformalMap& map, Vec2 x, double s) {
    const BoundaryFrame f = map.boundary_frame(s);
    const Vec2 zy{std::cos(s), std::sin(s)};
    const KernelEval k = pullback_kernel_z(map, map.inverse_point(x), zy);
    return f.n.dot(k.grad_y);
}

} // namespace discflow

#endif
