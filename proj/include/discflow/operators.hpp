#ifndef DISCFLOW_OPERATORS_HPP
#define DISCFLOW_OPERATORS_HPP

#include <cmath>
#include <limits>
#include <stdexcept>

#include "field.hpp"

namespace discflow {

// Second-order stencils in (r,theta): periodic in theta, across-origin at
// the inner ring (pairing with the antipodal angle), one-sided at the outer
// ring. Physical derivatives follow by the analytic map Jacobian chain.
namespace stencil {

inline double d_dr(const ScalarField& f, int i, int j) {
    const DiscGrid& g = f.grid();
    const double dr = g.dr();
    if (i == 0) return (f.at(1, j) - f.at(0, g.jantipode(j))) / (2.0 * dr);
    if (i == g.nr() - 1)
        return (3.0 * f.at(i, j) - 4.0 * f.at(i - 1, j) + f.at(i - 2, j)) / (2.0 * dr);
    return (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * dr);
}

inline double d_dtheta(const ScalarField& f, int i, int j) {
    const DiscGrid& g = f.grid();
    return (f.at(i, g.jwrap(j + 1)) - f.at(i, g.jwrap(j - 1))) / (2.0 * g.dtheta());
}

} // namespace stencil

inline VectorField grad(const ScalarField& f) {
    VectorField out(f.grid_ptr());
    const DiscGrid& g = f.grid();
    for (int i = 0; i < g.nr(); ++i) {
        for (int j = 0; j < g.ntheta(); ++j) {
            const int c = g.idx(i, j);
            const Vec2 d{stencil::d_dr(f, i, j), stencil::d_dtheta(f, i, j)};
            out.set(c, g.grad_chain(c).apply(d));
        }
    }
    return out;
}

inline ScalarField divergence(const VectorField& v) {
    ScalarField out(v.grid_ptr());
    const DiscGrid& g = v.grid();
    for (int i = 0; i < g.nr(); ++i) {
        for (int j = 0; j < g.ntheta(); ++j) {
            const int c = g.idx(i, j);
            const Mat2& G = g.grad_chain(c);
            const Vec2 d1{stencil::d_dr(v.comp(0), i, j), stencil::d_dtheta(v.comp(0), i, j)};
            const Vec2 d2{stencil::d_dr(v.comp(1), i, j), stencil::d_dtheta(v.comp(1), i, j)};
            out[c] = G.apply(d1).x + G.apply(d2).y;
        }
    }
    return out;
}

// omega = perp_grad . u = d2 u1 - d1 u2
inline ScalarField curl(const VectorField& v) {
    ScalarField out(v.grid_ptr());
    const DiscGrid& g = v.grid();
    for (int i = 0; i < g.nr(); ++i) {
        for (int j = 0; j < g.ntheta(); ++j) {
            const int c = g.idx(i, j);
            const Mat2& G = g.grad_chain(c);
            const Vec2 d1{stencil::d_dr(v.comp(0), i, j), stencil::d_dtheta(v.comp(0), i, j)};
            const Vec2 d2{stencil::d_dr(v.comp(1), i, j), stencil::d_dtheta(v.comp(1), i, j)};
            out[c] = G.apply(d1).y - G.apply(d2).x;
        }
    }
    return out;
}

// perp_grad f = (d2 f, -d1 f)
inline VectorField perp_grad(const ScalarField& f) {
    VectorField out(f.grid_ptr());
    const DiscGrid& g = f.grid();
    for (int c = 0, i = 0; i < g.nr(); ++i) {
        for (int j = 0; j < g.ntheta(); ++j, ++c) {
            const Vec2 d{stencil::d_dr(f, i, j), stencil::d_dtheta(f, i, j)};
            const Vec2 gr = g.grad_chain(c).apply(d);
            out.set(c, {gr.y, -gr.x});
        }
    }
    return out;
}

inline ScalarField laplacian(const ScalarField& f) { return divergence(grad(f)); }

inline double integrate(const ScalarField& f) {
    const DiscGrid& g = f.grid();
    double s = 0.0;
    for (int c = 0; c < g.size(); ++c) s += f[c] * g.cell_area(c);
    return s;
}

inline double lp_norm(const ScalarField& f, double p) {
    const DiscGrid& g = f.grid();
    if (std::isinf(p)) {
        double m = 0.0;
        for (int c = 0; c < g.size(); ++c) m = std::max(m, std::abs(f[c]));
        return m;
    }
    if (p < 1.0) throw std::domain_error("lp_norm: p must be >= 1");
    double s = 0.0;
    for (int c = 0; c < g.size(); ++c) s += std::pow(std::abs(f[c]), p) * g.cell_area(c);
    return std::pow(s, 1.0 / p);
}

inline double lp_norm(const VectorField& v, double p) {
    const DiscGrid& g = v.grid();
    if (std::isinf(p)) {
        double m = 0.0;
        for (int c = 0; c < g.size(); ++c) m = std::max(m, v.at(c).norm());
        return m;
    }
    if (p < 1.0) throw std::domain_error("lp_norm: p must be >= 1");
    double s = 0.0;
    for (int c = 0; c < g.size(); ++c) s += std::pow(v.at(c).norm(), p) * g.cell_area(c);
    return std::pow(s, 1.0 / p);
}

inline double h1_norm(const ScalarField& f) {
    const double l2 = lp_norm(f, 2.0);
    const double g2 = lp_norm(grad(f), 2.0);
    return std::sqrt(l2 * l2 + g2 * g2);
}

inline double h1_norm(const VectorField& v) {
    const double l2 = lp_norm(v, 2.0);
    const double g1 = lp_norm(grad(v.comp(0)), 2.0);
    const double g2 = lp_norm(grad(v.comp(1)), 2.0);
    return std::sqrt(l2 * l2 + g1 * g1 + g2 * g2);
}

} // namespace discflow

#endif
