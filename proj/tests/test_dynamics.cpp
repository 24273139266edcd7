#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "discflow/dynamics.hpp"

using namespace discflow;

namespace {

GridPtr make_grid(int nr, int nt, const ConformalMap& map) {
    return std::make_shared<DiscGrid>(nr, nt, map);
}

double total_mass(const State& s) { return integrate(s.rho); }

// advance to t_end, capping the last step
State run_to(const Dynamics& dyn, State s, double t_end) {
    while (s.t < t_end - 1e-14) s = dyn.step(s, t_end - s.t);
    return s;
}

} // namespace

TEST_CASE("parameter validation", "[dynamics]") {
    Params p;
    p.beta = 1.0;
    REQUIRE_THROWS_WITH(p.validate(), Catch::Matchers::ContainsSubstring("beta must exceed 1"));
    p = Params{};
    p.mu = 0.0;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
    p = Params{};
    p.cfl = 1.5;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("slip ghosts impose zero normal flux and zero wall curl", "[dynamics]") {
    auto g = make_grid(16, 32, ConformalMap::quadratic(0.3));
    State s = preset_state(g, "bump");
    // perturb so u.n != 0 at the wall cells
    for (int c = 0; c < g->size(); ++c) s.u.set(c, s.u.at(c) + Vec2{0.05, -0.02});
    GhostRing gh = slip_ghosts(s);
    const int i = g->nr() - 1;
    const double rc = 1.0 - 0.5 * g->dr(), rg = 1.0 + 0.5 * g->dr();
    for (int j = 0; j < g->ntheta(); ++j) {
        const double th = g->theta_center(j);
        const Vec2 er{std::cos(th), std::sin(th)}, et{-std::sin(th), std::cos(th)};
        const Mat2 Mc = detail::jacobian_from_dpsi(g->map().dpsi(std::polar(rc, th)));
        const Mat2 Mg = detail::jacobian_from_dpsi(g->map().dpsi(std::polar(rg, th)));
        const Vec2 Uc = Mc.transpose().apply(s.u.at(g->idx(i, j)));
        const Vec2 Ug = Mg.transpose().apply(gh.u[j]);
        // covariant pullback: radial component reflected (no normal flux),
        // r * U_theta continued across the face (curl u = 0 at the wall)
        REQUIRE(std::abs(Uc.dot(er) + Ug.dot(er)) < 1e-13);
        REQUIRE(std::abs(rc * Uc.dot(et) - rg * Ug.dot(et)) < 1e-13);
        REQUIRE(gh.rho[j] == s.rho[g->idx(i, j)]);
    }
}

TEST_CASE("equilibrium is preserved to machine precision", "[dynamics]") {
    for (const auto& map : {ConformalMap::identity(), ConformalMap::quadratic(0.3)}) {
        auto g = make_grid(16, 32, map);
        Dynamics dyn(g, Params{});
        State s = preset_state(g, "equilibrium");
        for (int k = 0; k < 1000; ++k) s = dyn.step(s);
        double du = 0.0, drho = 0.0;
        for (int c = 0; c < g->size(); ++c) {
            du = std::max(du, s.u.at(c).norm());
            drho = std::max(drho, std::abs(s.rho[c] - 1.0));
        }
        REQUIRE(du <= 1e-12);
        REQUIRE(drho <= 1e-12);
    }
}

TEST_CASE("mass is conserved to rounding", "[dynamics]") {
    auto g = make_grid(24, 48, ConformalMap::quadratic(0.25));
    Dynamics dyn(g, Params{});
    State s = preset_state(g, "bump");
    const double m0 = total_mass(s);
    for (int k = 0; k < 300; ++k) s = dyn.step(s);
    REQUIRE(std::abs(total_mass(s) - m0) <= 1e-12 * m0);
}

TEST_CASE("angular filter is idempotent and mode-selective", "[dynamics]") {
    auto g = make_grid(16, 64, ConformalMap::identity());
    Dynamics dyn(g, Params{});
    // m = 1 velocity field passes through unchanged
    VectorField u(g);
    for (int c = 0; c < g->size(); ++c) {
        const Vec2 x = g->physical_point(c);
        u.set(c, Vec2{-x.y, x.x} * (1.0 - x.norm2()));
    }
    VectorField v = u;
    dyn.filter_velocity(v);
    for (int c = 0; c < g->size(); ++c) REQUIRE((v.at(c) - u.at(c)).norm() < 1e-13);
    // high angular mode on the innermost ring is removed
    VectorField w(g);
    for (int j = 0; j < g->ntheta(); ++j)
        w.set(g->idx(0, j), {std::cos(8.0 * g->theta_center(j)), 0.0});
    dyn.filter_velocity(w);
    for (int j = 0; j < g->ntheta(); ++j) REQUIRE(std::abs(w.at(g->idx(0, j)).x) < 1e-13);
    // idempotent
    VectorField w2 = w;
    dyn.filter_velocity(w2);
    for (int c = 0; c < g->size(); ++c) REQUIRE((w2.at(c) - w.at(c)).norm() < 1e-13);
}

TEST_CASE("manufactured solution converges at first order or better", "[dynamics]") {
    Params p;
    p.forcing_u = [&p](Vec2 x, double t) { return mms::forcing(x, t, p); };
    const double t_end = 0.05;
    double err_prev = 0.0;
    std::vector<double> errs;
    for (int nr : {16, 32}) {
        auto g = make_grid(nr, 2 * nr, ConformalMap::identity());
        Dynamics dyn(g, p);
        State s = preset_state(g, "manufactured");
        s = run_to(dyn, std::move(s), t_end);
        ScalarField eu(g), er(g);
        for (int c = 0; c < g->size(); ++c) {
            const Vec2 x = g->physical_point(c);
            eu[c] = (s.u.at(c) - mms::velocity(x, t_end)).norm2();
            er[c] = std::pow(s.rho[c] - mms::rho(x), 2);
        }
        const double e = std::sqrt(integrate(eu) + integrate(er));
        errs.push_back(e);
        err_prev = e;
    }
    (void)err_prev;
    const double order = std::log2(errs[0] / errs[1]);
    INFO("errors " << errs[0] << " " << errs[1] << " order " << order);
    REQUIRE(order >= 1.0);
}

TEST_CASE("energy ledger closes and density stays bounded below", "[dynamics]") {
    auto g = make_grid(32, 64, ConformalMap::identity());
    Params p;
    Dynamics dyn(g, p);
    State s = preset_state(g, "bump");
    const double E0 = kinetic_energy(s) + internal_energy(s, p);
    const double rho_min0 = *std::min_element(s.rho.values().begin(), s.rho.values().end());
    double dcum = 0.0;
    const double t_end = 0.25;
    while (s.t < t_end - 1e-14) {
        const double d_before = dissipation_rate(s, p);
        State next = dyn.step(s, t_end - s.t);
        const double dt = next.t - s.t;
        dcum += 0.5 * dt * (d_before + dissipation_rate(next, p));
        s = std::move(next);
    }
    const double E1 = kinetic_energy(s) + internal_energy(s, p);
    const double defect = std::abs(E1 + dcum - E0);
    INFO("E0 " << E0 << " E1 " << E1 << " Dcum " << dcum << " defect " << defect);
    REQUIRE(defect <= 0.02 * E0);
    const double rho_min = *std::min_element(s.rho.values().begin(), s.rho.values().end());
    REQUIRE(rho_min / rho_min0 >= 0.5);
}

TEST_CASE("transport residuals vanish at equilibrium and refine with the mesh", "[dynamics]") {
    Params p;
    // equilibrium: both residuals are identically zero
    {
        auto g = make_grid(16, 32, ConformalMap::identity());
        Dynamics dyn(g, p);
        State s0 = preset_state(g, "equilibrium");
        State s1 = dyn.step(s0);
        const TransportResidual th = theta_transport_residual(s0, s1, p);
        const TransportResidual pr = pressure_transport_residual(s0, s1, p);
        REQUIRE(lp_norm(th.residual, 2.0) <= 1e-12);
        REQUIRE(lp_norm(pr.residual, 2.0) <= 1e-12);
        REQUIRE(th.vacuum_count == 0);
    }
    // bump flow: O(h + dt) residuals, decreasing under joint refinement
    std::vector<double> thn, prn;
    for (int nr : {16, 32}) {
        auto g = make_grid(nr, 2 * nr, ConformalMap::identity());
        Dynamics dyn(g, p);
        State s = preset_state(g, "bump");
        s = run_to(dyn, std::move(s), 0.02);
        State s1 = dyn.step(s);
        thn.push_back(lp_norm(theta_transport_residual(s, s1, p).residual, 2.0));
        prn.push_back(lp_norm(pressure_transport_residual(s, s1, p).residual, 2.0));
    }
    INFO("theta " << thn[0] << " -> " << thn[1] << ", pressure " << prn[0] << " -> " << prn[1]);
    REQUIRE(thn[1] < thn[0]);
    REQUIRE(prn[1] < prn[0]);
}

TEST_CASE("vacuum cells freeze and are counted", "[dynamics]") {
    auto g = make_grid(16, 32, ConformalMap::identity());
    Params p;
    Dynamics dyn(g, p);
    State s = preset_state(g, "bump");
    for (int j = 0; j < g->ntheta(); ++j) s.rho[g->idx(4, j)] = 0.0;
    ScalarField drho(g);
    VectorField du(g);
    dyn.rhs(s, drho, du);
    for (int j = 0; j < g->ntheta(); ++j) REQUIRE(du.at(g->idx(4, j)).norm() == 0.0);
    State s1(g);
    s1.t = 1e-6;
    s1.rho = s.rho;
    s1.u = s.u;
    const TransportResidual th = theta_transport_residual(s, s1, p);
    REQUIRE(th.vacuum_count == g->ntheta());
    for (int j = 0; j < g->ntheta(); ++j) REQUIRE(th.residual[g->idx(4, j)] == 0.0);
}

TEST_CASE("error conditions", "[dynamics]") {
    auto g = make_grid(16, 32, ConformalMap::identity());
    Params p;
    Dynamics dyn(g, p);
    // negative density is rejected
    State s = preset_state(g, "equilibrium");
    s.rho[5] = -0.1;
    ScalarField drho(g);
    VectorField du(g);
    REQUIRE_THROWS_AS(dyn.rhs(s, drho, du), state_error);
    // extreme density makes the viscous step collapse below the dt floor
    State heavy = preset_state(g, "equilibrium");
    for (int c = 0; c < g->size(); ++c) heavy.rho[c] = 1e30;
    REQUIRE_THROWS_AS(dyn.step(heavy), stiffness_error);
}

TEST_CASE("solid-body-like vortex stays tangential and smooth", "[dynamics]") {
    auto g = make_grid(24, 48, ConformalMap::moebius(Complex(0.2, -0.1)));
    Params p;
    Dynamics dyn(g, p);
    State s = preset_state(g, "vortex", 0.3);
    s = run_to(dyn, std::move(s), 0.05);
    REQUIRE(s.rho.all_finite());
    REQUIRE(s.u.all_finite());
    const double rho_min = *std::min_element(s.rho.values().begin(), s.rho.values().end());
    REQUIRE(rho_min > 0.5);
}
