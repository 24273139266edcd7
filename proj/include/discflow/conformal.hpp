#ifndef DISCFLOW_CONFORMAL_HPP
#define DISCFLOW_CONFORMAL_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "vec.hpp"

namespace discflow {

struct newton_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class MapKind { identity, moebius, quadratic, cubic };

inline const char* map_kind_name(MapKind k) {
    switch (k) {
        case MapKind::identity: return "identity";
        case MapKind::moebius: return "moebius";
        case MapKind::quadratic: return "quadratic";
        case MapKind::cubic: return "cubic";
    }
    return "?";
}

// Unit outward normal and tangent frame at a boundary point psi(e^{is}).
struct BoundaryFrame {
    Vec2 point;
    Vec2 n;
    Vec2 n_perp;
    double s = 0.0;
    // n.grad(phi) - |grad phi_1| * phi(point); zero for exact conformal maps.
    Vec2 pushforward_defect;
};

// Catalog of closed-form conformal maps psi from the closed unit disc onto
// smooth simply connected domains. Parameter ranges keep psi univalent with
// |psi'| > 0 on the closed disc. The inverse phi is obtained by damped Newton
// iteration on psi(z) = x (closed form for identity and Moebius).
class ConformalMap {
public:
    static ConformalMap identity() { return ConformalMap(MapKind::identity, Complex(0, 0), 0.0); }

    static ConformalMap moebius(Complex a) {
        if (std::abs(a) >= 1.0)
            throw std::domain_error("moebius parameter must satisfy |a| < 1");
        return ConformalMap(MapKind::moebius, a, 0.0);
    }

    static ConformalMap quadratic(double c) {
        if (std::abs(c) >= 0.5)
            throw std::domain_error("quadratic parameter must satisfy |c| < 1/2");
        return ConformalMap(MapKind::quadratic, Complex(0, 0), c);
    }

    static ConformalMap cubic(double c) {
        if (std::abs(c) >= 1.0 / 3.0)
            throw std::domain_error("cubic parameter must satisfy |c| < 1/3");
        return ConformalMap(MapKind::cubic, Complex(0, 0), c);
    }

    MapKind kind() const { return kind_; }
    Complex moebius_a() const { return a_; }
    double poly_c() const { return c_; }

    Complex psi(Complex z) const {
        switch (kind_) {
            case MapKind::identity: return z;
            case MapKind::moebius: return (z - a_) / (1.0 - std::conj(a_) * z);
            case MapKind::quadratic: return z + c_ * z * z;
            case MapKind::cubic: return z + c_ * z * z * z;
        }
        return z;
    }

    Complex dpsi(Complex z) const {
        switch (kind_) {
            case MapKind::identity: return 1.0;
            case MapKind::moebius: {
                const Complex d = 1.0 - std::conj(a_) * z;
                return (1.0 - std::norm(a_)) / (d * d);
            }
            case MapKind::quadratic: return 1.0 + 2.0 * c_ * z;
            case MapKind::cubic: return 1.0 + 3.0 * c_ * z * z;
        }
        return 1.0;
    }

    Complex ddpsi(Complex z) const {
        switch (kind_) {
            case MapKind::identity: return 0.0;
            case MapKind::moebius: {
                const Complex d = 1.0 - std::conj(a_) * z;
                return 2.0 * std::conj(a_) * (1.0 - std::norm(a_)) / (d * d * d);
            }
            case MapKind::quadratic: return 2.0 * c_;
            case MapKind::cubic: return 6.0 * c_ * z;
        }
        return 0.0;
    }

    Vec2 map_point(Vec2 z) const {
        if (z.norm() > 1.0 + 1e-12)
            throw std::domain_error("map_point: |z| > 1");
        return Vec2(psi(z.as_complex()));
    }

    // phi = psi^{-1}, clamped to the closed disc.
    Vec2 inverse_point(Vec2 x) const {
        Complex z = inverse_complex(x.as_complex());
        double r = std::abs(z);
        if (r > 1.0) {
            if (r > 1.0 + 1e-10)
                throw std::domain_error("inverse_point: x outside closed image domain");
            z /= r;
        }
        return Vec2(z);
    }

    // Complex derivative phi'(x) = 1 / psi'(phi(x)), given z = phi(x).
    Complex dphi_at(Complex z) const { return 1.0 / dpsi(z); }

    // phi''(x) = -psi''(z) * phi'(x)^3, given z = phi(x).
    Complex ddphi_at(Complex z) const {
        const Complex dp = dphi_at(z);
        return -ddpsi(z) * dp * dp * dp;
    }

    // grad phi as matrix M(k,i) = d phi_k / d x_i; Cauchy-Riemann structure.
    static Mat2 gradient_from_dphi(Complex dphi) {
        Mat2 m;
        m(0, 0) = dphi.real();
        m(0, 1) = -dphi.imag();
        m(1, 0) = dphi.imag();
        m(1, 1) = dphi.real();
        return m;
    }

    Mat2 phi_gradient(Vec2 x) const {
        const Vec2 z = inverse_point(x);
        return gradient_from_dphi(dphi_at(z.as_complex()));
    }

    BoundaryFrame boundary_frame(double s) const {
        BoundaryFrame f;
        f.s = s;
        const Complex zb = std::polar(1.0, s);
        const Complex p = psi(zb);
        f.point = Vec2(p);
        // d/ds psi(e^{is}) = i e^{is} psi'(e^{is})
        const Complex dp = Complex(0, 1) * zb * dpsi(zb);
        Vec2 tangent(dp);
        tangent = tangent / tangent.norm();
        Vec2 n{tangent.y, -tangent.x};
        // orient outward: an inward probe must land on the other side
        const Vec2 probe = Vec2(psi(0.9999 * zb));
        if ((probe - f.point).dot(n) > 0.0) n = n * (-1.0);
        f.n = n;
        f.n_perp = n.perp();

        const Complex dphi = dphi_at(zb);
        const Mat2 g = gradient_from_dphi(dphi);
        // (n.grad)phi_j = sum_i g(j,i) n_i, compared against |grad phi_1| ntilde
        const Vec2 push = g.apply(n);
        const Vec2 ntilde(zb);
        f.pushforward_defect = push - std::abs(dphi) * ntilde;
        return f;
    }

private:
    ConformalMap(MapKind k, Complex a, double c) : kind_(k), a_(a), c_(c) {}

    Complex inverse_complex(Complex x) const {
        if (kind_ == MapKind::identity) return x;
        if (kind_ == MapKind::moebius) return (x + a_) / (1.0 + std::conj(a_) * x);

        // damped Newton on psi(z) = x, start from x rescaled into the disc
        Complex z = x;
        const double ax = std::abs(x);
        if (ax > 1.0) z = x / ax;
        double res = std::abs(psi(z) - x);
        for (int it = 0; it < 50; ++it) {
            if (res <= 1e-13) return z;
            const Complex step = (psi(z) - x) / dpsi(z);
            double damp = 1.0;
            for (int k = 0; k < 30; ++k) {
                const Complex zn = z - damp * step;
                const double rn = std::abs(psi(zn) - x);
                if (rn < res) {
                    z = zn;
                    res = rn;
                    break;
                }
                damp *= 0.5;
            }
        }
        if (res <= 1e-13) return z;
        throw newton_error("inverse_point: Newton failed to converge (point outside domain or near-critical parameter)");
    }

    MapKind kind_;
    Complex a_;
    double c_;
};

// Boundary sample of a tangent vector field, used by the orthogonality check.
struct BoundaryVectorSample {
    double s = 0.0;
    Vec2 u;
};

// max over samples of |<(u.grad)phi(y0), phi(y0)>|; the samples must be
// tangent (u.n = 0) on the boundary.
inline double boundary_orthogonality_residual(const ConformalMap& map,
                                              const std::vector<BoundaryVectorSample>& samples) {
    double worst = 0.0;
    for (const auto& smp : samples) {
        const BoundaryFrame f = map.boundary_frame(smp.s);
        if (std::abs(smp.u.dot(f.n)) > 1e-8)
            throw std::invalid_argument("boundary_orthogonality_residual: sample is not tangent");
        const Complex zb = std::polar(1.0, smp.s);
        const Mat2 g = ConformalMap::gradient_from_dphi(map.dphi_at(zb));
        // w_j = u_i d_i phi_j
        const Vec2 w = g.apply(smp.u);
        const double r = std::abs(w.dot(Vec2(zb)));
        worst = std::max(worst, r);
    }
    return worst;
}

struct BiLipschitzConstants {
    double c1 = 0.0; // min ratio |phi(x)-phi(y)| / |x-y|
    double c2 = 0.0; // max ratio
};

// Measured over all pairs of grid nodes psi(r_i e^{i theta_j}), plus a ring
// of boundary nodes: |phi'| takes its extremes on |z| = 1 (max modulus), so
// the ratio extremes are only reached with boundary pairs in the sample.
inline BiLipschitzConstants measure_bilipschitz(const ConformalMap& map, int nr, int ntheta) {
    std::vector<Vec2> zs, xs;
    zs.reserve(static_cast<size_t>(nr + 1) * ntheta);
    for (int i = 0; i <= nr; ++i) {
        const double r = i < nr ? (i + 0.5) / nr : 1.0;
        for (int j = 0; j < ntheta; ++j) {
            const double th = (j + 0.5) * 2.0 * M_PI / ntheta;
            const Complex z = std::polar(r, th);
            zs.emplace_back(z);
            xs.emplace_back(map.psi(z));
        }
    }
    BiLipschitzConstants out;
    out.c1 = 1e300;
    for (size_t a = 0; a < zs.size(); ++a) {
        for (size_t b = a + 1; b < zs.size(); ++b) {
            const double dz = (zs[a] - zs[b]).norm();
            const double dx = (xs[a] - xs[b]).norm();
            if (dx < 1e-14) continue;
            const double ratio = dz / dx;
            out.c1 = std::min(out.c1, ratio);
            out.c2 = std::max(out.c2, ratio);
        }
    }
    return out;
}

} // namespace discflow

#endif
