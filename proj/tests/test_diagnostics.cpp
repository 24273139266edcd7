#include <catch2/catch_amalgamated.hpp>

#include "discflow/diagnostics.hpp"

using namespace discflow;

namespace {

GridPtr identity_grid(int nr, int nt) {
    return std::make_shared<DiscGrid>(nr, nt, ConformalMap::identity());
}

} // namespace

TEST_CASE("record at equilibrium matches closed forms", "[diagnostics]") {
    auto g = identity_grid(32, 64);
    Params p;
    Dynamics dyn(g, p);
    Diagnostics diag(p);

    State s0 = preset_state(g, "equilibrium");
    State s1 = dyn.step(s0);
    diag.accumulate(s0, s1);
    DiagnosticsRecord r = diag.record(s0, s1);

    CHECK(r.t == s1.t);
    CHECK(r.mass == Catch::Approx(M_PI).margin(1e-12));
    CHECK(r.E_kin == 0.0);
    CHECK(r.A2_sq == 0.0);
    // F = -P(1) = -1 everywhere, 2mu + lambda(1) = 3
    CHECK(r.A1_sq == Catch::Approx(1.0 + M_PI / 3.0).margin(1e-12));
    CHECK(r.log_A1_sq == Catch::Approx(std::log(1.0 + M_PI / 3.0)).margin(1e-12));
    CHECK(r.E_int == Catch::Approx(M_PI / (p.gamma - 1.0)).margin(1e-12));
    CHECK(r.D_cum == 0.0);
    CHECK(r.R_T == 2.0);
    CHECK(r.rho_min == 1.0);
    CHECK(r.vacuum_ratio == 0.0);
    CHECK(r.theta_residual_norm <= 1e-12);
    CHECK(r.moment_nu == 0.0);
    CHECK(r.nu == Catch::Approx(0.05 * std::pow(2.0, -0.5 * p.beta)));
}

TEST_CASE("A2 matches rigid-rotation centripetal closed form", "[diagnostics]") {
    auto g = identity_grid(64, 64);
    Params p;
    Diagnostics diag(p);

    // steady rotation u = (-y, x): u_t = 0 and u.grad u = -(x, y) exactly,
    // so A2^2 = int rho |x|^2 = pi/2
    State s0(g);
    State s1(g);
    for (int c = 0; c < g->size(); ++c) {
        const Vec2 z = g->physical_point(c);
        s0.rho[c] = s1.rho[c] = 1.0;
        s0.u.set(c, {-z.y, z.x});
        s1.u.set(c, {-z.y, z.x});
    }
    s1.t = 0.1;
    DiagnosticsRecord r = diag.record(s0, s1);
    CHECK(r.A2_sq == Catch::Approx(M_PI / 2.0).epsilon(1e-2));
    CHECK(r.E_kin == Catch::Approx(M_PI / 4.0).epsilon(2e-3));
}

TEST_CASE("running accumulators are monotone on a bump run", "[diagnostics]") {
    auto g = identity_grid(24, 48);
    Params p;
    Dynamics dyn(g, p);
    Diagnostics diag(p);

    State s = preset_state(g, "bump");
    double d_prev = 0.0, rt_prev = 0.0, a1_prev = 0.0;
    for (int k = 0; k < 40; ++k) {
        State next = dyn.step(s);
        diag.accumulate(s, next);
        DiagnosticsRecord r = diag.record(s, next);
        CHECK(r.D_cum >= d_prev);
        CHECK(r.R_T >= std::max(rt_prev, 1.0));
        CHECK(r.A1_sq >= 1.0);
        CHECK(std::isfinite(r.A2_sq));
        CHECK(r.moment_nu > 0.0);
        d_prev = r.D_cum;
        rt_prev = r.R_T;
        a1_prev = r.A1_sq;
        s = std::move(next);
    }
    CHECK(d_prev > 0.0);
    CHECK(rt_prev >= 2.199); // bump peaks at rho = 1.2 at the origin
}

TEST_CASE("commutator samples integrate by trapezoid", "[diagnostics]") {
    Diagnostics diag(Params{});
    diag.add_commutator_sample(0.0, 1.0);
    diag.add_commutator_sample(1.0, 3.0);
    diag.add_commutator_sample(2.0, 3.0);
    CHECK(diag.d_cum() == 0.0);

    auto g = identity_grid(8, 16);
    Dynamics dyn(g, Params{});
    State s0 = preset_state(g, "equilibrium");
    State s1 = dyn.step(s0);
    diag.accumulate(s0, s1);
    CHECK(diag.record(s0, s1).J_time_integral == Catch::Approx(5.0));
}

TEST_CASE("density norms of the unit state", "[diagnostics]") {
    auto g = identity_grid(32, 64);
    State s = preset_state(g, "equilibrium");
    const double inf = std::numeric_limits<double>::infinity();
    auto norms = probe_density_lp(s, {1.0, 2.0, 4.0, inf});
    CHECK(norms[0] == Catch::Approx(M_PI).margin(1e-12));
    CHECK(norms[1] == Catch::Approx(std::sqrt(M_PI)).margin(1e-12));
    CHECK(norms[2] == Catch::Approx(std::pow(M_PI, 0.25)).margin(1e-12));
    CHECK(norms[3] == 1.0);
}

TEST_CASE("bkm ratio closed forms", "[diagnostics]") {
    auto g = identity_grid(32, 64);

    State eq = preset_state(g, "equilibrium");
    CHECK(probe_bkm(eq) == 0.0);

    // u = (-y, x): |grad u| = sqrt(2), div = 0, omega = -2, grad^2 u = 0
    State rot(g);
    for (int c = 0; c < g->size(); ++c) {
        const Vec2 z = g->physical_point(c);
        rot.rho[c] = 1.0;
        rot.u.set(c, {-z.y, z.x});
    }
    const double gl2 = std::sqrt(2.0 * M_PI);
    CHECK(probe_bkm(rot) == Catch::Approx(std::sqrt(2.0) / (2.0 + gl2 + 1.0)).epsilon(5e-3));
}

TEST_CASE("div-curl probe is stable and bounded", "[diagnostics]") {
    auto g24 = identity_grid(24, 48);
    auto g32 = identity_grid(32, 64);
    ProbeStats a = probe_div_curl(g24, 2.0, 20, 7);
    ProbeStats b = probe_div_curl(g32, 2.0, 20, 7);
    CHECK(a.n_samples == 20);
    CHECK(a.skipped == 0);
    CHECK(a.max > 0.0);
    CHECK(std::isfinite(a.max));
    CHECK(b.max / a.max > 0.6);
    CHECK(b.max / a.max < 1.6);
    CHECK(a.median <= a.q90);
    CHECK(a.q90 <= a.max);

    CHECK_THROWS_AS(probe_div_curl(g24, 1.0, 4, 1), std::invalid_argument);
    CHECK_THROWS_AS(probe_div_curl(g24, std::numeric_limits<double>::infinity(), 4, 1),
                    std::invalid_argument);
}

TEST_CASE("probe ratios are exactly scale invariant", "[diagnostics]") {
    auto g = identity_grid(24, 48);
    VectorField v = random_slip_field(g, 11, 4);
    VectorField v2(g), v64(g);
    for (int c = 0; c < g->size(); ++c) {
        v2.set(c, v.at(c) * 2.0);
        v64.set(c, v.at(c) * 64.0);
    }
    CHECK(div_curl_ratio(v, 3.0) == div_curl_ratio(v2, 3.0));
    CHECK(div_curl_ratio(v, 3.0) == div_curl_ratio(v64, 3.0));
    CHECK(weighted_gradient_ratio(v, 0.1) == weighted_gradient_ratio(v2, 0.1));
    CHECK(weighted_gradient_ratio(v, 0.1) == weighted_gradient_ratio(v64, 0.1));
}

TEST_CASE("degenerate and non-tangent fields are rejected", "[diagnostics]") {
    auto g = identity_grid(16, 32);

    VectorField zero(g);
    bool degen = false;
    CHECK(div_curl_ratio(zero, 2.0, &degen) == 0.0);
    CHECK(degen);
    degen = false;
    CHECK(weighted_gradient_ratio(zero, 0.1, &degen) == 0.0);
    CHECK(degen);

    VectorField radial(g);
    for (int c = 0; c < g->size(); ++c) radial.set(c, g->physical_point(c));
    CHECK_THROWS_WITH(div_curl_ratio(radial, 2.0),
                      Catch::Matchers::ContainsSubstring("not tangent"));
    CHECK_THROWS_AS(weighted_gradient_ratio(radial, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(weighted_gradient_ratio(zero, 0.6), std::invalid_argument);
    CHECK_THROWS_AS(weighted_gradient_ratio(zero, -0.1), std::invalid_argument);
}

TEST_CASE("poincare-sobolev table stays within a small factor across p", "[diagnostics]") {
    auto g = identity_grid(24, 48);
    const std::vector<double> ps{4.0, 8.0, 16.0, 32.0};
    auto table = probe_poincare_sobolev(g, ps, 20, 3);
    REQUIRE(table.size() == 4);
    // the effective constant C_p = p^{1/2} * ratio_p must not grow with p
    double lo = std::sqrt(ps[0]) * table[0], hi = lo;
    for (size_t q = 0; q < ps.size(); ++q) {
        CHECK(std::isfinite(table[q]));
        CHECK(table[q] > 0.0);
        const double cp = std::sqrt(ps[q]) * table[q];
        lo = std::min(lo, cp);
        hi = std::max(hi, cp);
    }
    CHECK(hi / lo < 3.0);
    CHECK_THROWS_AS(probe_poincare_sobolev(g, {2.0}, 2, 1), std::invalid_argument);
}

TEST_CASE("weighted gradient probe is finite on random slip fields", "[diagnostics]") {
    auto g = identity_grid(24, 48);
    ProbeStats s = probe_weighted_gradient(g, 0.1, 20, 5);
    CHECK(s.n_samples == 20);
    CHECK(s.skipped == 0);
    CHECK(std::isfinite(s.max));
    CHECK(s.max > 0.3);
    CHECK(s.median > 0.0);
}
