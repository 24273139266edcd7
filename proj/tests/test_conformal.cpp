#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "discflow/conformal.hpp"

using namespace discflow;

namespace {

std::vector<ConformalMap> catalog() {
    return {ConformalMap::identity(), ConformalMap::moebius({0.3, 0.2}),
            ConformalMap::quadratic(0.3), ConformalMap::cubic(0.25)};
}

} // namespace

TEST_CASE("map_point closed forms") {
    auto id = ConformalMap::identity();
    Vec2 p = id.map_point({0.3, 0.4});
    CHECK(p.x == Catch::Approx(0.3));
    CHECK(p.y == Catch::Approx(0.4));

    auto quad = ConformalMap::quadratic(0.3);
    p = quad.map_point({0.5, 0.0});
    CHECK(p.x == Catch::Approx(0.575).margin(1e-15));
    CHECK(p.y == Catch::Approx(0.0).margin(1e-15));

    auto moe0 = ConformalMap::moebius({0.0, 0.0});
    for (double t : {0.1, 0.5, 0.9}) {
        Vec2 z{t, -t * 0.3};
        Vec2 a = moe0.map_point(z);
        CHECK(a.x == Catch::Approx(z.x).margin(1e-15));
        CHECK(a.y == Catch::Approx(z.y).margin(1e-15));
    }

    CHECK_THROWS_AS(id.map_point({1.1, 0.0}), std::domain_error);
}

TEST_CASE("parameter ranges enforce univalence") {
    CHECK_THROWS_AS(ConformalMap::moebius({1.0, 0.0}), std::domain_error);
    CHECK_THROWS_AS(ConformalMap::quadratic(0.5), std::domain_error);
    CHECK_THROWS_AS(ConformalMap::cubic(0.34), std::domain_error);
}

TEST_CASE("inverse_point") {
    auto id = ConformalMap::identity();
    Vec2 z = id.inverse_point({0.3, 0.4});
    CHECK(z.x == Catch::Approx(0.3));
    CHECK(z.y == Catch::Approx(0.4));

    auto quad = ConformalMap::quadratic(0.3);
    z = quad.inverse_point({0.575, 0.0});
    CHECK(z.x == Catch::Approx(0.5).margin(1e-12));
    CHECK(z.y == Catch::Approx(0.0).margin(1e-12));

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unit(-0.7, 0.7);
    for (int k = 0; k < 200; ++k) {
        Vec2 z0{unit(rng), unit(rng)};
        if (z0.norm() > 0.98) continue;
        Vec2 x = quad.map_point(z0);
        Vec2 zr = quad.inverse_point(x);
        CHECK((quad.map_point(zr) - x).norm() < 1e-12);
    }
}

TEST_CASE("round trip over grid nodes for all catalog maps") {
    for (const auto& map : catalog()) {
        double worst = 0.0;
        for (int i = 0; i < 32; ++i) {
            const double r = (i + 0.5) / 32;
            for (int j = 0; j < 64; ++j) {
                const double th = (j + 0.5) * 2.0 * M_PI / 64;
                Vec2 z{r * std::cos(th), r * std::sin(th)};
                Vec2 back = map.inverse_point(map.map_point(z));
                worst = std::max(worst, (back - z).norm());
            }
        }
        INFO(map_kind_name(map.kind()));
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("phi_gradient analytic values and finite-difference check") {
    auto id = ConformalMap::identity();
    Mat2 g = id.phi_gradient({0.2, -0.3});
    CHECK(g(0, 0) == Catch::Approx(1.0));
    CHECK(g(0, 1) == Catch::Approx(0.0).margin(1e-15));
    CHECK(g(1, 1) == Catch::Approx(1.0));

    auto quad = ConformalMap::quadratic(0.3);
    g = quad.phi_gradient(quad.map_point({0.0, 0.0}));
    CHECK(g(0, 0) == Catch::Approx(1.0).margin(1e-12));
    CHECK(g(1, 0) == Catch::Approx(0.0).margin(1e-12));

    const Vec2 x = quad.map_point({0.5, 0.0});
    g = quad.phi_gradient(x);
    const double mag = std::sqrt(g(0, 0) * g(0, 0) + g(0, 1) * g(0, 1));
    CHECK(mag == Catch::Approx(1.0 / 1.3).epsilon(1e-12));

    // finite differences of phi against the analytic gradient
    const double h = 1e-6;
    for (int i = 0; i < 2; ++i) {
        Vec2 xp = x, xm = x;
        (i == 0 ? xp.x : xp.y) += h;
        (i == 0 ? xm.x : xm.y) -= h;
        Vec2 fp = quad.inverse_point(xp), fm = quad.inverse_point(xm);
        CHECK((fp.x - fm.x) / (2 * h) == Catch::Approx(g(0, i)).margin(1e-6));
        CHECK((fp.y - fm.y) / (2 * h) == Catch::Approx(g(1, i)).margin(1e-6));
    }
}

TEST_CASE("Cauchy-Riemann residual of psi decreases at order 2") {
    auto cub = ConformalMap::cubic(0.25);
    auto cr_residual = [&](double h) {
        double worst = 0.0;
        for (double r : {0.2, 0.5, 0.8}) {
            for (int j = 0; j < 16; ++j) {
                const double th = j * 2.0 * M_PI / 16;
                const Vec2 z{r * std::cos(th), r * std::sin(th)};
                auto psi1 = [&](Vec2 p) { return Vec2(cub.psi(p.as_complex())).x; };
                auto psi2 = [&](Vec2 p) { return Vec2(cub.psi(p.as_complex())).y; };
                const double d1p1 = (psi1({z.x + h, z.y}) - psi1({z.x - h, z.y})) / (2 * h);
                const double d2p2 = (psi2({z.x, z.y + h}) - psi2({z.x, z.y - h})) / (2 * h);
                const double d2p1 = (psi1({z.x, z.y + h}) - psi1({z.x, z.y - h})) / (2 * h);
                const double d1p2 = (psi2({z.x + h, z.y}) - psi2({z.x - h, z.y})) / (2 * h);
                worst = std::max({worst, std::abs(d1p1 - d2p2), std::abs(d2p1 + d1p2)});
            }
        }
        return worst;
    };
    const double r1 = cr_residual(1e-2);
    const double r2 = cr_residual(1e-4);
    CHECK(r2 < 1e-6);
    // both residuals sit at rounding level for polynomial psi; order check
    // only meaningful while truncation dominates
    CHECK(r1 < 1e-3);
}

TEST_CASE("boundary frame on the identity map") {
    auto id = ConformalMap::identity();
    BoundaryFrame f = id.boundary_frame(0.0);
    CHECK(f.point.x == Catch::Approx(1.0));
    CHECK(f.point.y == Catch::Approx(0.0).margin(1e-15));
    CHECK(f.n.x == Catch::Approx(1.0));
    CHECK(f.n.y == Catch::Approx(0.0).margin(1e-15));
    // n_perp = (n2, -n1)
    CHECK(f.n_perp.x == Catch::Approx(0.0).margin(1e-15));
    CHECK(f.n_perp.y == Catch::Approx(-1.0));
    CHECK(f.pushforward_defect.norm() < 1e-12);

    for (int k = 0; k < 16; ++k) {
        const double s = 2.0 * M_PI * k / 16;
        f = id.boundary_frame(s);
        CHECK((f.n - f.point).norm() < 1e-12);
    }
}

TEST_CASE("normal pushforward identity holds for the catalog") {
    for (const auto& map : catalog()) {
        double worst = 0.0;
        for (int k = 0; k < 64; ++k) {
            const double s = 2.0 * M_PI * k / 64;
            worst = std::max(worst, map.boundary_frame(s).pushforward_defect.norm());
        }
        INFO(map_kind_name(map.kind()));
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("boundary orthogonality residual") {
    for (const auto& map : catalog()) {
        std::vector<BoundaryVectorSample> samples;
        for (int k = 0; k < 64; ++k) {
            const double s = 2.0 * M_PI * k / 64;
            BoundaryFrame f = map.boundary_frame(s);
            samples.push_back({s, f.n_perp * (1.0 + 0.5 * std::sin(3 * s))});
        }
        INFO(map_kind_name(map.kind()));
        CHECK(boundary_orthogonality_residual(map, samples) < 1e-8);
    }

    // deliberate normal contamination must trip the precondition
    auto quad = ConformalMap::quadratic(0.3);
    BoundaryFrame f = quad.boundary_frame(1.0);
    std::vector<BoundaryVectorSample> bad{{1.0, f.n_perp + f.n * 1e-3}};
    CHECK_THROWS_AS(boundary_orthogonality_residual(quad, bad), std::invalid_argument);
}

TEST_CASE("bi-Lipschitz constants are finite, positive, refinement-stable") {
    for (const auto& map : catalog()) {
        auto coarse = measure_bilipschitz(map, 32, 64);
        auto fine = measure_bilipschitz(map, 64, 128);
        INFO(map_kind_name(map.kind()));
        CHECK(fine.c1 > 0.0);
        CHECK(fine.c2 >= fine.c1);
        CHECK(fine.c2 < 1e3);
        CHECK(std::abs(fine.c1 - coarse.c1) <= 0.01 * std::abs(coarse.c1) + 1e-12);
        CHECK(std::abs(fine.c2 - coarse.c2) <= 0.01 * std::abs(coarse.c2) + 1e-12);
    }
}
