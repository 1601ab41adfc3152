#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "gradient_check.hpp"
#include "phyzzy/common/errors.hpp"
#include "phyzzy/common/rng.hpp"
#include "phyzzy/physics/bearing.hpp"

using phyzzy::DataError;
using phyzzy::Rng;
using phyzzy::ndcore::Tape;
using phyzzy::ndcore::Tensor;
using namespace phyzzy::physics;

namespace {

BearingGeometry test_geometry() {
  BearingGeometry geom;
  geom.pitch_diameter_m = 0.0715;
  geom.ball_diameter_m = 0.0084;
  geom.shaft_hz = 33.33;
  geom.sampling_hz = 20000.0;
  geom.fault_depth_m = 0.0;
  return geom;
}

}  // namespace

TEST_CASE("spall width degenerate and closed-form cases") {
  BearingGeometry geom = test_geometry();
  CHECK(spall_width(geom, 0.0) == 0.0);

  // fault depth zero leaves only the passage term, exactly
  const double dp = geom.pitch_diameter_m;
  const double db = geom.ball_diameter_m;
  const double direct =
      M_PI * geom.shaft_hz * (dp * dp - db * db) / (dp * geom.sampling_hz) * 42.0;
  CHECK(spall_width(geom, 42.0) == direct);

  // frozen from an independent high-precision evaluation
  CHECK(spall_width(geom, 100.0) ==
        doctest::Approx(0.036916905296155144).epsilon(1e-12));

  CHECK_THROWS_AS(spall_width(geom, -1.0), std::invalid_argument);
}

TEST_CASE("spall width grows with sp and with fault depth") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    BearingGeometry geom = test_geometry();
    geom.fault_depth_m = rng.uniform(0.0, 1e-3);
    const double sp = rng.uniform(0.0, 600.0);
    const double more_sp = sp + rng.uniform(0.1, 100.0);
    CHECK(spall_width(geom, more_sp) > spall_width(geom, sp));
    BearingGeometry deeper = geom;
    deeper.fault_depth_m = geom.fault_depth_m + rng.uniform(1e-6, 1e-3);
    CHECK(spall_width(deeper, sp) > spall_width(geom, sp));
  }
}

TEST_CASE("rul exponential closed forms") {
  BearingGeometry geom = test_geometry();
  SpallGrowthConfig growth;

  // weight * l_max equal to the observed width means no life left
  const double l_max = spall_width(geom, growth.sp_at_failure);
  CHECK(rul_exponential(l_max, 1.0, geom, growth) == doctest::Approx(0.0));

  // ratio e with r = 0.001: raw life is 1/ln(1.001); frozen independently
  const double l_o = l_max / std::exp(1.0);
  const double normalized = rul_exponential(l_o, 1.0, geom, growth);
  CHECK(normalized == doctest::Approx(1000.4999167083070 / 6324.0).epsilon(1e-9));
  CHECK(normalized == doctest::Approx(0.15820681794881514).epsilon(1e-9));

  // healthy width below the floor clamps at the floor and saturates
  const double tiny = spall_floor(geom) / 100.0;
  const double healthy = rul_exponential(tiny, 1.0, geom, growth);
  const double expected_raw =
      std::log(l_max / spall_floor(geom)) / std::log1p(growth.growth_rate);
  CHECK(healthy ==
        doctest::Approx(std::clamp(expected_raw / growth.t_max, 0.0, 1.0)));

  // non-positive weight is treated as the clamp floor, not an error
  CHECK(std::isfinite(rul_exponential(l_o, 0.0, geom, growth)));
  CHECK(rul_exponential(l_o, -3.0, geom, growth) ==
        rul_exponential(l_o, 0.0, geom, growth));
}

TEST_CASE("rul is monotone in width and weight on interior samples") {
  BearingGeometry geom = test_geometry();
  SpallGrowthConfig growth;
  growth.t_max = 600.0;
  Rng rng(17);
  const double l_max = spall_width(geom, growth.sp_at_failure);
  for (int trial = 0; trial < 300; ++trial) {
    const double w = rng.uniform(0.3, 1.0);
    const double l = rng.uniform(l_max * 0.2, l_max * 0.9);
    const double wider = l * (1.0 + rng.uniform(0.01, 0.2));
    CHECK(rul_exponential(wider, w, geom, growth) <=
          rul_exponential(l, w, geom, growth));
    const double heavier = std::min(1.0, w + rng.uniform(0.01, 0.3));
    CHECK(rul_exponential(l, heavier, geom, growth) >=
          rul_exponential(l, w, geom, growth));
  }
}

TEST_CASE("tape rul path matches the scalar path and its gradient checks") {
  BearingGeometry geom = test_geometry();
  SpallGrowthConfig growth;
  growth.t_max = 600.0;
  const double l_max = spall_width(geom, growth.sp_at_failure);
  Rng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const double w0 = rng.uniform(0.2, 0.95);
    const double l_o = rng.uniform(l_max * 0.3, l_max * 0.8);
    Tensor w = Tensor::scalar(w0, true);
    auto forward = [&]() {
      Tape t;
      return rul_exponential(t, w, l_o, geom, growth).scalar_value();
    };
    Tape t;
    Tensor out = rul_exponential(t, w, l_o, geom, growth);
    CHECK(out.scalar_value() ==
          doctest::Approx(rul_exponential(l_o, w0, geom, growth))
              .epsilon(1e-12));
    // keep interior points only: the clamp kills the gradient at 0 and 1
    const double raw = std::log(w0 * l_max / l_o) / std::log1p(growth.growth_rate);
    if (raw <= 1.0 || raw >= growth.t_max - 1.0) continue;
    w.zero_grad();
    t.backward(out);
    CHECK(phyzzy::testsupport::max_grad_rel_err(w, forward, w.grad()) < 1e-4);
  }
}

TEST_CASE("geometry and growth validation") {
  BearingGeometry geom = test_geometry();
  geom.ball_diameter_m = geom.pitch_diameter_m + 0.01;
  CHECK_THROWS_AS(geom.validate(), std::invalid_argument);
  SpallGrowthConfig growth;
  growth.growth_rate = 0.0;
  CHECK_THROWS_AS(growth.validate(), std::invalid_argument);
}

TEST_CASE("physics config file round trip and validation") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "phyzzy_physics_test";
  fs::create_directories(dir);
  const fs::path path = dir / "bearing.conf";

  PhysicsConfig config;
  config.geometry = test_geometry();
  config.growth.growth_rate = 0.0025;
  config.growth.sp_at_failure = 480.0;
  config.growth.t_max = 600.0;
  save_physics_config(path, config);

  const PhysicsConfig loaded = load_physics_config(path);
  CHECK(loaded.geometry.pitch_diameter_m ==
        doctest::Approx(config.geometry.pitch_diameter_m));
  CHECK(loaded.growth.growth_rate == doctest::Approx(0.0025));
  CHECK(loaded.growth.t_max == doctest::Approx(600.0));

  {
    std::ofstream bad(path);
    bad << "pitch_diameter_m = 0.07\nnot_a_key = 3\n";
  }
  CHECK_THROWS_AS(load_physics_config(path), DataError);
  {
    std::ofstream bad(path);
    bad << "pitch_diameter_m = 0.07\n";
  }
  CHECK_THROWS_AS(load_physics_config(path), DataError);
  CHECK_THROWS_AS(load_physics_config(dir / "missing.conf"), DataError);
  fs::remove_all(dir);
}
