#ifndef DISCFLOW_ELLIPTIC_HPP
#define DISCFLOW_ELLIPTIC_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "greens.hpp"
#include "operators.hpp"
#include "state.hpp"

namespace discflow {

struct solver_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Effective viscous flux and vorticity of a state:
//   F = (2 mu + lambda(rho)) div u - P(rho),  omega = curl u.
struct FluxFields {
    ScalarField F;
    ScalarField omega;
};

inline FluxFields flux_from_state(const State& s, const Params& p) {
    for (int c = 0; c < s.grid().size(); ++c)
        if (s.rho[c] < 0.0) throw state_error("flux_from_state: negative density");
    ScalarField div_u = divergence(s.u);
    ScalarField F(s.grid_ptr());
    for (int c = 0; c < s.grid().size(); ++c)
        F[c] = (2.0 * p.mu + p.lambda(s.rho[c])) * div_u[c] - p.pressure(s.rho[c]);
    return {std::move(F), curl(s.u)};
}

namespace detail {

// Net outward flux of S through the faces of each cell, assembled once per
// face with midpoint values on physical face geometry. The r = 1 boundary
// faces are included only when requested; a Neumann flux problem drops them
// because the same boundary term appears on both sides of the equation.
inline std::vector<double> fv_flux_divergence(const VectorField& S, bool include_boundary) {
    const DiscGrid& g = S.grid();
    std::vector<double> b(static_cast<size_t>(g.size()), 0.0);
    // radial faces between rings i and i+1
    for (int i = 0; i + 1 < g.nr(); ++i) {
        const double rf = (i + 1) * g.dr();
        for (int j = 0; j < g.ntheta(); ++j) {
            const double th = g.theta_center(j);
            const Vec2 n = g.radial_face_normal(rf, th);
            const double len = g.radial_face_length(rf, th);
            const Vec2 Sf = (S.at(g.idx(i, j)) + S.at(g.idx(i + 1, j))) * 0.5;
            const double flux = Sf.dot(n) * len;
            b[g.idx(i, j)] += flux;
            b[g.idx(i + 1, j)] -= flux;
        }
    }
    // theta faces inside ring i between j and j+1 (periodic)
    for (int i = 0; i < g.nr(); ++i) {
        const double r = g.r_center(i);
        for (int j = 0; j < g.ntheta(); ++j) {
            const int jp = g.jwrap(j + 1);
            const double thf = (j + 1) * g.dtheta();
            const Vec2 n = g.theta_face_normal(r, thf);
            const double len = g.theta_face_length(r, thf);
            const Vec2 Sf = (S.at(g.idx(i, j)) + S.at(g.idx(i, jp))) * 0.5;
            const double flux = Sf.dot(n) * len;
            b[g.idx(i, j)] += flux;
            b[g.idx(i, jp)] -= flux;
        }
    }
    if (include_boundary) {
        const int i = g.nr() - 1;
        for (int j = 0; j < g.ntheta(); ++j) {
            const double th = g.theta_center(j);
            const Vec2 n = g.radial_face_normal(1.0, th);
            const double len = g.radial_face_length(1.0, th);
            b[g.idx(i, j)] += S.at(g.idx(i, j)).dot(n) * len;
        }
    }
    return b;
}

// Five-point finite-volume Laplacian on the disc grid. Surface integrals of
// the conjugated gradient reduce to plain polar differences (a conformal map
// leaves flux integrals of gradients invariant), so the matrix depends only
// on (nr, ntheta). The origin is a zero-length face and drops out naturally.
class PolarLaplacian {
public:
    explicit PolarLaplacian(GridPtr grid, bool dirichlet)
        : g_(std::move(grid)), dirichlet_(dirichlet) {
        const int nr = g_->nr();
        cr_.resize(static_cast<size_t>(nr));
        ct_.resize(static_cast<size_t>(nr));
        for (int i = 0; i < nr; ++i) {
            // face between ring i and i+1; at i = nr-1 this is the wall
            const double rf = (i + 1) * g_->dr();
            cr_[i] = rf * g_->dtheta() / g_->dr();
            ct_[i] = g_->dr() / (g_->r_center(i) * g_->dtheta());
        }
        // homogeneous Dirichlet ghost sits half a cell outside the wall
        cr_.back() = dirichlet_ ? 2.0 * g_->dtheta() / g_->dr() : 0.0;
        diag_.resize(static_cast<size_t>(g_->size()));
        for (int i = 0; i < nr; ++i) {
            double d = 2.0 * ct_[i] + cr_[i];
            if (i > 0) d += cr_[i - 1];
            for (int j = 0; j < g_->ntheta(); ++j) diag_[g_->idx(i, j)] = d;
        }
    }

    // y = -L x (symmetric positive semi-definite; definite when Dirichlet)
    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        const DiscGrid& g = *g_;
        const int nt = g.ntheta();
        for (int i = 0; i < g.nr(); ++i) {
            for (int j = 0; j < nt; ++j) {
                const int c = g.idx(i, j);
                double acc = diag_[c] * x[c];
                acc -= ct_[i] * (x[g.idx(i, g.jwrap(j + 1))] + x[g.idx(i, g.jwrap(j - 1))]);
                if (i > 0) acc -= cr_[i - 1] * x[g.idx(i - 1, j)];
                if (i + 1 < g.nr()) acc -= cr_[i] * x[g.idx(i + 1, j)];
                y[c] = acc;
            }
        }
    }

    // Solve -L x = -b by Jacobi-preconditioned CG. The Neumann operator is
    // singular with a constant null space, so b and the iterates are kept
    // mean-free there; the caller fixes the additive constant afterwards.
    std::vector<double> solve(std::vector<double> b) const {
        const int n = g_->size();
        if (!dirichlet_) remove_mean(b);
        for (double& v : b) v = -v;
        std::vector<double> x(static_cast<size_t>(n), 0.0), r = b,
            z(static_cast<size_t>(n)), p(static_cast<size_t>(n)), ap(static_cast<size_t>(n));
        const double bnorm = std::sqrt(dot(b, b));
        if (bnorm == 0.0) return x;
        for (int c = 0; c < n; ++c) z[c] = r[c] / diag_[c];
        p = z;
        double rz = dot(r, z);
        const long maxiter = 20L * n;
        for (long it = 0; it < maxiter; ++it) {
            apply(p, ap);
            const double alpha = rz / dot(p, ap);
            for (int c = 0; c < n; ++c) {
                x[c] += alpha * p[c];
                r[c] -= alpha * ap[c];
            }
            if (!dirichlet_) remove_mean(r);
            if (std::sqrt(dot(r, r)) <= 1e-10 * bnorm) {
                if (!dirichlet_) remove_mean(x);
                return x;
            }
            for (int c = 0; c < n; ++c) z[c] = r[c] / diag_[c];
            const double rz_new = dot(r, z);
            const double betak = rz_new / rz;
            rz = rz_new;
            for (int c = 0; c < n; ++c) p[c] = z[c] + betak * p[c];
        }
        throw solver_error("PolarLaplacian: CG did not converge");
    }

private:
    static double dot(const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (size_t c = 0; c < a.size(); ++c) s += a[c] * b[c];
        return s;
    }
    static void remove_mean(std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        for (double& x : v) x -= m;
    }

    GridPtr g_;
    bool dirichlet_;
    std::vector<double> cr_, ct_, diag_;
};

} // namespace detail

// Solve  Delta u = div S  with  du/dn = g  on the wall and a prescribed
// domain mean. With g = S.n (the default) the boundary terms cancel exactly
// on both sides and the discrete system is compatible to rounding; an
// explicit g adds the mismatch through the wall faces.
inline ScalarField solve_neumann_flux(const VectorField& S, double mean,
                                      const std::function<double(double)>& boundary_flux = nullptr) {
    const DiscGrid& g = S.grid();
    std::vector<double> b = detail::fv_flux_divergence(S, false);
    if (boundary_flux) {
        const int i = g.nr() - 1;
        for (int j = 0; j < g.ntheta(); ++j) {
            const double th = g.theta_center(j);
            const Vec2 n = g.radial_face_normal(1.0, th);
            const double len = g.radial_face_length(1.0, th);
            b[g.idx(i, j)] += (S.at(g.idx(i, j)).dot(n) - boundary_flux(th)) * len;
        }
    }
    detail::PolarLaplacian L(S.grid_ptr(), false);
    std::vector<double> x = L.solve(std::move(b));
    ScalarField out(S.grid_ptr());
    out.values() = std::move(x);
    const double shift = mean - integrate(out) / g.total_area();
    for (int c = 0; c < g.size(); ++c) out[c] += shift;
    return out;
}

// Solve  mu Delta w = perp_grad . S = div (-S2, S1)  with  w = 0  on the
// wall (the slip condition pins the vorticity there).
inline ScalarField solve_dirichlet_vorticity(const VectorField& S, double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("solve_dirichlet_vorticity: mu must be positive");
    const DiscGrid& g = S.grid();
    VectorField T(S.grid_ptr());
    for (int c = 0; c < g.size(); ++c) {
        const Vec2 s = S.at(c);
        T.set(c, {-s.y, s.x});
    }
    std::vector<double> b = detail::fv_flux_divergence(T, true);
    for (double& v : b) v /= mu;
    detail::PolarLaplacian L(S.grid_ptr(), true);
    std::vector<double> x = L.solve(std::move(b));
    ScalarField out(S.grid_ptr());
    out.values() = std::move(x);
    return out;
}

// Midpoint quadrature over the whole disc with local refinement near the
// probe x: cells whose center lies within patch_diameters cell diameters of
// x are split nsub x nsub in (r, theta), and the sub-cell containing the
// probe is skipped (the kernel gradient is odd there, so its angular average
// over the skipped sub-cell vanishes at leading order). The visitor receives
// (cell index, disc point, physical point, weight).
template <class Visitor>
void singular_patch_quadrature(const DiscGrid& g, Vec2 x, Vec2 zx, double patch_diameters,
                               int nsub, Visitor&& visit) {
    const ConformalMap& map = g.map();
    const double dr = g.dr(), dth = g.dtheta();
    const double rx = zx.norm();
    const double thx = std::atan2(zx.y, zx.x);
    for (int i = 0; i < g.nr(); ++i) {
        for (int j = 0; j < g.ntheta(); ++j) {
            const int c = g.idx(i, j);
            const Vec2 y = g.physical_point(c);
            if ((y - x).norm() > patch_diameters * g.cell_diameter(c)) {
                visit(c, g.disc_point(c), y, g.cell_area(c));
                continue;
            }
            const double drs = dr / nsub, dths = dth / nsub;
            for (int a = 0; a < nsub; ++a) {
                const double rs = i * dr + (a + 0.5) * drs;
                for (int bq = 0; bq < nsub; ++bq) {
                    const double ths = j * dth + (bq + 0.5) * dths;
                    // disc-coordinate containment test for the probe
                    double dt = std::remainder(ths - thx, 2.0 * M_PI);
                    if (std::abs(rs - rx) <= 0.5 * drs && std::abs(dt) <= 0.5 * dths) continue;
                    const Complex zs = std::polar(rs, ths);
                    const double w = std::norm(map.dpsi(zs)) * rs * drs * dths;
                    visit(c, Vec2(zs), Vec2(map.psi(zs)), w);
                }
            }
        }
    }
}

// Reconstruct the flux at an interior probe from its interior source and
// wall trace:
//   F(x) = sign * [ int grad_y Ntil(x,y) . S(y) dy - oint dNtil/dn F dS ].
// boundary_F holds samples at s_k = 2 pi k / nb on the wall psi(e^{is}).
inline double representation(const DiscGrid& g, const VectorField& S,
                             const std::vector<double>& boundary_F, Vec2 x, double sign = 1.0) {
    const ConformalMap& map = g.map();
    const Vec2 zx = map.inverse_point(x);
    if (1.0 - zx.norm() < 2.0 * g.dr())
        throw std::invalid_argument("representation: probe within two cells of the wall");
    double vol = 0.0;
    // sub-cell count grows with resolution so the patch error (dominated by
    // the skipped singular sub-cell, O(dr/nsub)) refines at second order
    const int nsub = std::max(8, g.nr() / 4);
    singular_patch_quadrature(g, x, zx, 3.0, nsub, [&](int c, Vec2 zy, Vec2 /*y*/, double w) {
        const KernelEval k = pullback_kernel_z(map, zx, zy);
        vol += k.grad_y.dot(S.at(c)) * w;
    });
    if (boundary_F.empty()) throw std::invalid_argument("representation: empty boundary trace");
    const int nb = static_cast<int>(boundary_F.size());
    double bnd = 0.0;
    for (int k = 0; k < nb; ++k) {
        const double s = 2.0 * M_PI * k / nb;
        const BoundaryFrame f = map.boundary_frame(s);
        const Vec2 zy{std::cos(s), std::sin(s)};
        const double dndn = f.n.dot(pullback_kernel_z(map, zx, zy).grad_y);
        bnd += dndn * boundary_F[static_cast<size_t>(k)] * std::abs(map.dpsi(zy.as_complex())) *
               (2.0 * M_PI / nb);
    }
    return sign * (vol - bnd);
}

} // namespace discflow

#endif
