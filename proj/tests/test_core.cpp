#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "sarcvx/config.hpp"
#include "sarcvx/dielectric.hpp"
#include "sarcvx/geometry.hpp"
#include "sarcvx/units.hpp"

using namespace sarcvx;

TEST_CASE("unit conversion round trip") {
    auto d = to_dimensionless(0.3, 1.0);
    CHECK(d.x == doctest::Approx(1.0));
    CHECK(d.tau == doctest::Approx(1.0));

    auto z = to_dimensionless(0.0, 0.0);
    CHECK(z.x == 0.0);
    CHECK(z.tau == 0.0);

    auto e = to_dimensionless(0.6, 3.88);
    CHECK(e.x == doctest::Approx(2.0));
    CHECK(e.tau == doctest::Approx(3.88));

    // exact recovery
    for (double x : {0.0, 0.125, 0.3, 1.7, -2.25})
        CHECK(to_meters(to_dimensionless(x, 0.0).x) == x);
}

TEST_CASE("central line geometry") {
    Vec3 src{0.0, -1.7, 0.8};
    Ray3 ray = central_line(src, M_PI / 4.0);
    CHECK(ray.direction.x == 0.0);
    CHECK(ray.direction.y == doctest::Approx(std::sin(M_PI / 4)));
    CHECK(ray.direction.z == doctest::Approx(-std::cos(M_PI / 4)));
    CHECK(ray.direction.norm() == doctest::Approx(1.0));

    // parametrization origin
    Vec3 p0 = ray.at(0.0);
    CHECK(p0.x == src.x);
    CHECK(p0.y == src.y);
    CHECK(p0.z == src.z);

    // two sources differing only in x give parallel rays
    Ray3 ray2 = central_line({0.5, -1.7, 0.8}, M_PI / 4.0);
    CHECK(ray2.direction.y == ray.direction.y);
    CHECK(ray2.direction.z == ray.direction.z);

    CHECK_THROWS_AS(central_line(src, 0.0), ConfigError);
    CHECK_THROWS_AS(central_line(src, M_PI / 2.0), ConfigError);
}

TEST_CASE("default config matches the reference setup and validates") {
    PipelineConfig cfg = default_config();
    CHECK(cfg.lambda == doctest::Approx(1.05));
    CHECK(cfg.alpha == doctest::Approx(0.49));
    CHECK(cfg.gamma == doctest::Approx(1e-10));
    CHECK(cfg.dy == doctest::Approx(8e-3));
    CHECK(cfg.b >= std::sqrt(cfg.c_upper) - 1e-12);
    CHECK(cfg.t_tilde >= 4.0 * cfg.b - 1e-12);
    CHECK(cfg.nx == 81);
    CHECK(cfg.grid_step() == doctest::Approx(0.05));
    CHECK(cfg.geometry.lines.size() == 3);
    CHECK(cfg.geometry.lines[1].y0 == doctest::Approx(-1.7));
    CHECK(cfg.geometry.lines[0].count == 28);
    CHECK_NOTHROW(cfg.validate());

    PipelineConfig bad = cfg;
    bad.alpha = 0.7;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.t_tilde = 3.0 * bad.b;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("config file round trip") {
    PipelineConfig cfg = default_config();
    cfg.lambda = 1.5;
    cfg.cal_factor = 42.0;
    cfg.scheme = TimeScheme::Explicit;
    auto path = std::filesystem::temp_directory_path() / "sarcvx_test_cfg.cfg";
    write_config(cfg, path.string());
    PipelineConfig back = load_config(path.string());
    CHECK(back.lambda == doctest::Approx(1.5));
    CHECK(back.cal_factor == doctest::Approx(42.0));
    CHECK(back.scheme == TimeScheme::Explicit);
    CHECK(back.geometry.lines.size() == cfg.geometry.lines.size());
    std::filesystem::remove(path);
}

TEST_CASE("dielectric models satisfy the layered-medium constraints") {
    PipelineConfig cfg = default_config();
    cfg.nx = 81;
    DielectricField f =
        make_ellipsoid_model(cfg.domain_radius, cfg.nx, 4.0, {0, 0, -0.14}, {0.2, 0.12, 0.04}, 15.0);
    CHECK_NOTHROW(f.validate());
    // air value above the interface, sand deep below, target at the center
    CHECK(f.sample({0.0, 0.0, 0.5}) == doctest::Approx(1.0));
    CHECK(f.sample({0.5, 0.5, -0.5}) == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(f.sample({0.0, 0.0, -0.14}) > 10.0);

    DielectricField p =
        make_prism_model(cfg.domain_radius, cfg.nx, 4.0, {0, 0, -0.14}, {0.18, 0.08, 0.08}, 23.8);
    CHECK(p.sample({0.0, 0.0, -0.14}) > 20.0);
    CHECK(p.sample({0.0, 0.0, 0.5}) == doctest::Approx(1.0));
}
