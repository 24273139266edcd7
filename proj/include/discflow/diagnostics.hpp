#ifndef DISCFLOW_DIAGNOSTICS_HPP
#define DISCFLOW_DIAGNOSTICS_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "dynamics.hpp"
#include "sampler.hpp"

namespace discflow {

// One row of the monitored a-priori quantities.
struct DiagnosticsRecord {
    double t = 0.0;
    double mass = 0.0;
    double E_kin = 0.0;
    double E_int = 0.0;
    double D_cum = 0.0;          // cumulative dissipation
    double A1_sq = 1.0;          // 1 + int(omega^2 + F^2/(2mu+lambda))
    double A2_sq = 0.0;          // int rho |udot|^2
    double R_T = 1.0;            // running 1 + max rho, nondecreasing
    double rho_min = 0.0;
    double vacuum_ratio = 0.0;   // fraction of cells at or below the vacuum floor
    double theta_residual_norm = 0.0;
    double moment_nu = 0.0;      // int rho |u|^{2+nu}
    double nu = 0.0;             // R_T^{-beta/2} nu0
    double log_A1_sq = 0.0;
    double J_time_integral = 0.0; // running time integral of the max-probe commutator
};

// Accumulates the running quantities (D_cum, R_T, J integral) across a run
// and assembles full records from consecutive state pairs.
class Diagnostics {
public:
    explicit Diagnostics(Params params, double nu0 = 0.05) : p_(std::move(params)), nu0_(nu0) {}

    double nu0() const { return nu0_; }
    double d_cum() const { return d_cum_; }
    double r_t() const { return r_t_; }

    // Advance the running integrals over one step; call once per step (or
    // per record interval) with consecutive states.
    void accumulate(const State& prev, const State& next) {
        const double dt = next.t - prev.t;
        if (!(dt > 0.0)) throw std::invalid_argument("Diagnostics::accumulate: dt <= 0");
        if (prev.t != last_t_ || !have_last_d_) last_d_ = dissipation_rate(prev, p_);
        const double dn = dissipation_rate(next, p_);
        d_cum_ += 0.5 * dt * (last_d_ + dn);
        last_d_ = dn;
        last_t_ = next.t;
        have_last_d_ = true;
        double rmax = 0.0;
        for (double r : next.rho.values()) rmax = std::max(rmax, r);
        r_t_ = std::max(r_t_, 1.0 + rmax);
    }

    // Fold a commutator max-probe sample into its running time integral.
    void add_commutator_sample(double t, double value) {
        if (have_last_j_) j_int_ += 0.5 * (t - last_j_t_) * (last_j_ + value);
        last_j_t_ = t;
        last_j_ = value;
        have_last_j_ = true;
    }

    // Full record from two consecutive states; assumes accumulate() has been
    // called for every step up to next.t.
    DiagnosticsRecord record(const State& prev, const State& next) const {
        const DiscGrid& g = next.grid();
        const double dt = next.t - prev.t;
        if (!(dt > 0.0)) throw std::invalid_argument("Diagnostics::record: dt <= 0");
        DiagnosticsRecord r;
        r.t = next.t;
        r.mass = integrate(next.rho);
        r.E_kin = kinetic_energy(next);
        r.E_int = internal_energy(next, p_);
        r.D_cum = d_cum_;
        r.R_T = r_t_;
        r.J_time_integral = j_int_;

        // A1^2 = 1 + int(omega^2 + F^2/(2mu+lambda)) at the current state
        {
            const ScalarField dvu = divergence(next.u);
            const ScalarField w = curl(next.u);
            ScalarField e(next.grid_ptr());
            for (int c = 0; c < g.size(); ++c) {
                const double lam = 2.0 * p_.mu + p_.lambda(next.rho[c]);
                const double F = lam * dvu[c] - p_.pressure(next.rho[c]);
                e[c] = w[c] * w[c] + F * F / lam;
            }
            r.A1_sq = 1.0 + integrate(e);
            r.log_A1_sq = std::log(r.A1_sq);
        }

        // A2^2 = int rho |udot|^2 with the two-state material derivative
        {
            VectorField umid(next.grid_ptr());
            for (int c = 0; c < g.size(); ++c)
                umid.set(c, (prev.u.at(c) + next.u.at(c)) * 0.5);
            const VectorField gu1 = grad(umid.comp(0));
            const VectorField gu2 = grad(umid.comp(1));
            ScalarField e(next.grid_ptr());
            for (int c = 0; c < g.size(); ++c) {
                const Vec2 ut = (next.u.at(c) - prev.u.at(c)) / dt;
                const Vec2 um = umid.at(c);
                const Vec2 udot{ut.x + um.dot(gu1.at(c)), ut.y + um.dot(gu2.at(c))};
                const double rho_m = 0.5 * (prev.rho[c] + next.rho[c]);
                e[c] = rho_m * udot.norm2();
            }
            r.A2_sq = integrate(e);
        }

        double rmin = std::numeric_limits<double>::infinity();
        int nvac = 0;
        for (double rho : next.rho.values()) {
            rmin = std::min(rmin, rho);
            if (rho <= kVacuumThreshold) ++nvac;
        }
        r.rho_min = rmin;
        r.vacuum_ratio = static_cast<double>(nvac) / g.size();

        r.theta_residual_norm = lp_norm(theta_transport_residual(prev, next, p_).residual, 2.0);

        r.nu = std::pow(r_t_, -0.5 * p_.beta) * nu0_;
        {
            ScalarField e(next.grid_ptr());
            for (int c = 0; c < g.size(); ++c)
                e[c] = next.rho[c] * std::pow(next.u.at(c).norm2(), 0.5 * (2.0 + r.nu));
            r.moment_nu = integrate(e);
        }
        return r;
    }

private:
    Params p_;
    double nu0_;
    double d_cum_ = 0.0, r_t_ = 1.0, j_int_ = 0.0;
    double last_d_ = 0.0, last_t_ = -1.0, last_j_ = 0.0, last_j_t_ = 0.0;
    bool have_last_d_ = false, have_last_j_ = false;
};

// --- functional-inequality probes -------------------------------------------

struct ProbeStats {
    double max = 0.0;
    double median = 0.0;
    double q90 = 0.0;
    int n_samples = 0;
    int skipped = 0;
};

namespace detail {

inline ProbeStats stats_from(std::vector<double> ratios, int skipped) {
    ProbeStats s;
    s.n_samples = static_cast<int>(ratios.size());
    s.skipped = skipped;
    if (ratios.empty()) return s;
    std::sort(ratios.begin(), ratios.end());
    s.max = ratios.back();
    s.median = ratios[ratios.size() / 2];
    s.q90 = ratios[static_cast<size_t>(0.9 * (ratios.size() - 1))];
    return s;
}

// Scale the field by the power of two bringing max|v| into [1, 2); exact in
// floating point, so every ratio built afterwards is exactly invariant under
// v -> 2v.
inline bool normalize_pow2(VectorField& v) {
    double m = 0.0;
    for (int c = 0; c < v.grid().size(); ++c)
        m = std::max({m, std::abs(v.at(c).x), std::abs(v.at(c).y)});
    if (m == 0.0 || !std::isfinite(m)) return false;
    const double s = std::exp2(-std::floor(std::log2(m)));
    for (int c = 0; c < v.grid().size(); ++c) v.set(c, v.at(c) * s);
    return true;
}

// Throws if the field visibly violates u.n = 0 at the wall. The normal
// component is extrapolated from the two outermost rings to the wall radius,
// where it vanishes to O(dr^2) for genuine slip fields.
inline void require_tangent(const VectorField& v) {
    const DiscGrid& g = v.grid();
    const int i = g.nr() - 1;
    double vn = 0.0, vmax = 0.0;
    for (int c = 0; c < g.size(); ++c) vmax = std::max(vmax, v.at(c).norm());
    for (int j = 0; j < g.ntheta(); ++j) {
        const Vec2 n = g.radial_face_normal(1.0, g.theta_center(j));
        const double a1 = v.at(g.idx(i, j)).dot(n);
        const double a2 = v.at(g.idx(i - 1, j)).dot(n);
        vn = std::max(vn, std::abs(1.5 * a1 - 0.5 * a2));
    }
    if (vmax > 0.0 && vn > 0.7 * vmax)
        throw std::invalid_argument("probe: field is not tangent at the boundary (u.n != 0)");
}

} // namespace detail

// ratio of Frobenius gradient norm to div + curl norms; 0 flags degenerate
inline double div_curl_ratio(VectorField v, double p, bool* degenerate = nullptr) {
    detail::require_tangent(v);
    if (degenerate) *degenerate = false;
    if (!detail::normalize_pow2(v)) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    const VectorField g1 = grad(v.comp(0));
    const VectorField g2 = grad(v.comp(1));
    ScalarField gnorm(v.grid_ptr());
    for (int c = 0; c < v.grid().size(); ++c)
        gnorm[c] = std::sqrt(g1.at(c).norm2() + g2.at(c).norm2());
    const double num = lp_norm(gnorm, p);
    const double den = lp_norm(divergence(v), p) + lp_norm(curl(v), p);
    if (den < 1e-14) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    return num / den;
}

// Lemma-2.2 style probe over random slip fields.
inline ProbeStats probe_div_curl(const GridPtr& grid, double p, int n_samples, unsigned seed) {
    if (!(p > 1.0) || std::isinf(p)) throw std::invalid_argument("probe_div_curl: p in (1,inf)");
    std::vector<double> ratios;
    int skipped = 0;
    for (int k = 0; k < n_samples; ++k) {
        bool degen = false;
        const double r = div_curl_ratio(random_slip_field(grid, seed + k, 4), p, &degen);
        if (degen)
            ++skipped;
        else
            ratios.push_back(r);
    }
    return detail::stats_from(std::move(ratios), skipped);
}

// max over samples of ||u||_p / (p^{1/2} ||u||_2^{2/p} ||u||_H1^{1-2/p})
inline std::vector<double> probe_poincare_sobolev(const GridPtr& grid,
                                                  const std::vector<double>& p_list,
                                                  int n_samples, unsigned seed) {
    for (double p : p_list)
        if (!(p > 2.0)) throw std::invalid_argument("probe_poincare_sobolev: p > 2 required");
    std::vector<double> out(p_list.size(), 0.0);
    for (int k = 0; k < n_samples; ++k) {
        const VectorField u = random_slip_field(grid, seed + k, 4);
        const double l2 = lp_norm(u, 2.0);
        const double h1 = h1_norm(u);
        if (l2 < 1e-14 || h1 < 1e-14) continue;
        for (size_t q = 0; q < p_list.size(); ++q) {
            const double p = p_list[q];
            const double lp = lp_norm(u, p);
            const double ratio =
                lp / (std::sqrt(p) * std::pow(l2, 2.0 / p) * std::pow(h1, 1.0 - 2.0 / p));
            out[q] = std::max(out[q], ratio);
        }
    }
    return out;
}

// int |u|^nu |grad u|^2 / int |u|^nu ((div u)^2 + omega^2); 0 flags degenerate
inline double weighted_gradient_ratio(VectorField u, double nu, bool* degenerate = nullptr) {
    if (!(nu > 0.0 && nu < 0.5))
        throw std::invalid_argument("weighted_gradient_ratio: nu in (0, 0.5)");
    detail::require_tangent(u);
    if (degenerate) *degenerate = false;
    if (!detail::normalize_pow2(u)) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    const VectorField g1 = grad(u.comp(0));
    const VectorField g2 = grad(u.comp(1));
    const ScalarField dv = divergence(u);
    const ScalarField w = curl(u);
    ScalarField num(u.grid_ptr()), den(u.grid_ptr());
    for (int c = 0; c < u.grid().size(); ++c) {
        const double wt = std::pow(u.at(c).norm2(), 0.5 * nu);
        num[c] = wt * (g1.at(c).norm2() + g2.at(c).norm2());
        den[c] = wt * (dv[c] * dv[c] + w[c] * w[c]);
    }
    const double d = integrate(den);
    if (d < 1e-14) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    return integrate(num) / d;
}

inline ProbeStats probe_weighted_gradient(const GridPtr& grid, double nu, int n_samples,
                                          unsigned seed) {
    std::vector<double> ratios;
    int skipped = 0;
    for (int k = 0; k < n_samples; ++k) {
        bool degen = false;
        const double r = weighted_gradient_ratio(random_slip_field(grid, seed + k, 4), nu, &degen);
        if (degen)
            ++skipped;
        else
            ratios.push_back(r);
    }
    return detail::stats_from(std::move(ratios), skipped);
}

// ||grad u||_inf / [(||div||_inf + ||omega||_inf) log(e + ||grad^2 u||_4)
//                   + ||grad u||_2 + 1], with q = 4 fixed
inline double probe_bkm(const State& s) {
    const DiscGrid& g = s.grid();
    const VectorField g1 = grad(s.u.comp(0));
    const VectorField g2 = grad(s.u.comp(1));
    ScalarField gnorm(s.grid_ptr());
    for (int c = 0; c < g.size(); ++c)
        gnorm[c] = std::sqrt(g1.at(c).norm2() + g2.at(c).norm2());
    const double ginf = lp_norm(gnorm, std::numeric_limits<double>::infinity());
    const double gl2 = lp_norm(gnorm, 2.0);
    const double dinf = lp_norm(divergence(s.u), std::numeric_limits<double>::infinity());
    const double winf = lp_norm(curl(s.u), std::numeric_limits<double>::infinity());
    // second gradient by repeated differences, interior cells only
    const VectorField h[4] = {grad(g1.comp(0)), grad(g1.comp(1)), grad(g2.comp(0)),
                              grad(g2.comp(1))};
    double sum = 0.0;
    for (int i = 1; i + 1 < g.nr(); ++i) {
        for (int j = 0; j < g.ntheta(); ++j) {
            const int c = g.idx(i, j);
            double f = 0.0;
            for (const auto& hk : h) f += hk.at(c).norm2();
            sum += f * f * g.cell_area(c); // (sqrt f)^4 = f^2
        }
    }
    const double h4 = std::pow(sum, 0.25);
    return ginf / ((dinf + winf) * std::log(M_E + h4) + gl2 + 1.0);
}

// table of ||rho||_p (p may be infinity)
inline std::vector<double> probe_density_lp(const State& s, const std::vector<double>& p_list) {
    std::vector<double> out;
    out.reserve(p_list.size());
    for (double p : p_list) out.push_back(lp_norm(s.rho, p));
    return out;
}

} // namespace discflow

#endif
