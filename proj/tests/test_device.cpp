#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "dbosim/device.hpp"
#include "dbosim/rng.hpp"
#include "oracles.hpp"

using namespace dbosim;

namespace {
const DeviceParams kNominal{1.0, 0.3, 10e3};
const DeviceParams kHot{0.7, 0.22, 10e3};
}  // namespace

TEST_CASE("tmr_at matches the bias-dependence model") {
  CHECK(tmr_at(kNominal, 0.0) == 1.0);
  CHECK(tmr_at(kNominal, 0.3) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(tmr_at(kHot, 0.44) == doctest::Approx(0.14).epsilon(1e-12));
  CHECK_THROWS_AS(tmr_at(kNominal, -0.1), std::invalid_argument);
}

TEST_CASE("tmr_at halves exactly at vh and decreases strictly") {
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    DeviceParams p{rng.uniform(0.3, 2.0), rng.uniform(0.1, 0.5), rng.uniform(5e3, 20e3)};
    CHECK(tmr_at(p, p.vh) == p.tmr0 / 2.0);
    double prev = tmr_at(p, 0.0);
    for (double v = 0.01; v <= 1.0; v += 0.01) {
      const double cur = tmr_at(p, v);
      CHECK(cur < prev);
      prev = cur;
    }
  }
}

TEST_CASE("cell currents follow Ohm's law on both branches") {
  const CellCurrents c = cell_currents(kNominal, 0.3);
  CHECK(c.i_p == doctest::Approx(30e-6).epsilon(1e-12));
  CHECK(c.i_ap == doctest::Approx(20e-6).epsilon(1e-12));  // R_AP = 10k * 1.5

  const CellCurrents zero = cell_currents(kNominal, 0.0);
  CHECK(zero.i_p == 0.0);
  CHECK(zero.i_ap == 0.0);

  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    DeviceParams p{rng.uniform(0.3, 2.0), rng.uniform(0.1, 0.5), rng.uniform(5e3, 20e3)};
    const double v = rng.uniform(0.0, 1.0);
    const CellCurrents cc = cell_currents(p, v);
    CHECK(cc.i_p >= cc.i_ap);
  }
}

TEST_CASE("reference current is the midpoint of the two read levels") {
  CHECK(reference_current(kNominal, 0.3) == doctest::Approx(25e-6).epsilon(1e-12));
  CHECK(reference_current(kNominal, 0.0) == 0.0);
  // near the optimum: i_p 42.43 uA, i_ap 31.82 uA -> midpoint 37.13 uA
  CHECK(reference_current(kNominal, 0.4243) ==
        doctest::Approx(3.7126699160e-5).epsilon(1e-9));

  // read-1 and read-0 margins around the reference are equal
  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    DeviceParams p{rng.uniform(0.3, 2.0), rng.uniform(0.1, 0.5), rng.uniform(5e3, 20e3)};
    const double v = rng.uniform(0.001, 1.0);
    const CellCurrents c = cell_currents(p, v);
    const double i_ref = reference_current(p, v);
    CHECK(std::abs((i_ref - c.i_ap) - (c.i_p - i_ref)) <= 1e-18);
    CHECK(i_ref == doctest::Approx(0.5 * (c.i_p + c.i_ap)).epsilon(1e-15));
  }
}

TEST_CASE("margin closed form agrees with the current-difference route") {
  CHECK(margin(kNominal, 0.3) == doctest::Approx(5.0e-6).epsilon(1e-12));
  CHECK(margin(kNominal, 0.0) == 0.0);

  // peak value via the independent simplification tmr0*vh / (4 rp sqrt(1+tmr0))
  const double peak = kNominal.tmr0 * kNominal.vh /
                      (4.0 * kNominal.rp * std::sqrt(1.0 + kNominal.tmr0));
  CHECK(margin(kNominal, v_opt(kNominal)) == doctest::Approx(peak).epsilon(1e-12));
  CHECK(margin(kNominal, v_opt(kNominal)) == doctest::Approx(5.303e-6).epsilon(1e-4));
  CHECK(margin(kNominal, 0.4243) == doctest::Approx(5.3033008399e-6).epsilon(1e-9));

  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    DeviceParams p{rng.uniform(0.3, 2.0), rng.uniform(0.1, 0.5), rng.uniform(5e3, 20e3)};
    const double v = rng.uniform(1e-4, 1.0);
    const CellCurrents c = cell_currents(p, v);
    CHECK(margin(p, v) ==
          doctest::Approx(0.5 * (c.i_p - c.i_ap)).epsilon(1e-12));
  }
}

TEST_CASE("margin is unimodal with a single interior maximum") {
  Rng rng(19);
  for (int i = 0; i < 20; ++i) {
    DeviceParams p{rng.uniform(0.3, 2.0), rng.uniform(0.1, 0.5), rng.uniform(5e3, 20e3)};
    const double vo = v_opt(p);
    double prev = margin(p, 1e-3);
    int sign_changes = 0;
    bool increasing = true;
    for (double v = 2e-3; v <= 1.0; v += 1e-3) {
      const double cur = margin(p, v);
      const bool now_increasing = cur > prev;
      if (increasing && !now_increasing) {
        ++sign_changes;
        // the turn happens within one grid step of the closed-form optimum
        CHECK(std::abs(v - vo) <= 2e-3);
      }
      if (!increasing) CHECK_FALSE(now_increasing);
      increasing = now_increasing;
      prev = cur;
    }
    CHECK(sign_changes == 1);
  }
}

TEST_CASE("v_opt closed form") {
  CHECK(v_opt(kNominal) == doctest::Approx(0.3 * std::sqrt(2.0)).epsilon(1e-15));
  CHECK(v_opt(kNominal) == doctest::Approx(0.42426).epsilon(1e-4));
  CHECK(v_opt(kHot) == doctest::Approx(0.22 * std::sqrt(1.7)).epsilon(1e-15));
  CHECK(v_opt(kHot) == doctest::Approx(0.28684).epsilon(1e-4));
  CHECK(v_opt({0.0, 0.25, 10e3}) == 0.25);
  CHECK_THROWS_AS(v_opt({-0.5, 0.3, 10e3}), std::invalid_argument);
}

TEST_CASE("v_opt matches a 0.1 mV grid search for randomized parameters") {
  Rng rng(23);
  for (int i = 0; i < 100; ++i) {
    DeviceParams p{rng.uniform(0.3, 2.0), rng.uniform(0.1, 0.5), rng.uniform(5e3, 20e3)};
    const double grid = test::grid_argmax_margin(p, 1e-4, 1.0, 1e-4);
    CHECK(std::abs(grid - v_opt(p)) <= 2e-4);
  }
}

TEST_CASE("thermal model reproduces anchors exactly and interpolates linearly") {
  const ThermalModel tm({{25.0, 1.0, 0.3}, {125.0, 0.7, 0.22}}, 10e3);

  const DeviceParams at25 = tm.params_at(25.0);
  CHECK(at25.tmr0 == 1.0);
  CHECK(at25.vh == 0.3);
  CHECK(at25.rp == 10e3);

  const DeviceParams at125 = tm.params_at(125.0);
  CHECK(at125.tmr0 == 0.7);
  CHECK(at125.vh == 0.22);

  const DeviceParams mid = tm.params_at(75.0);
  CHECK(mid.tmr0 == doctest::Approx(0.85).epsilon(1e-12));
  CHECK(mid.vh == doctest::Approx(0.26).epsilon(1e-12));

  // extrapolation below the anchor span uses the nearest segment
  const DeviceParams cold = tm.params_at(-40.0);
  CHECK(cold.tmr0 == doctest::Approx(1.195).epsilon(1e-12));
  CHECK(cold.vh == doctest::Approx(0.352).epsilon(1e-12));

  CHECK_THROWS_AS(tm.params_at(-40.1), std::out_of_range);
  CHECK_THROWS_AS(tm.params_at(125.1), std::out_of_range);
}

TEST_CASE("thermal interpolation is monotone between monotone anchors") {
  const ThermalModel tm({{25.0, 1.0, 0.3}, {125.0, 0.7, 0.22}}, 10e3);
  double prev_tmr0 = tm.params_at(25.0).tmr0;
  double prev_vh = tm.params_at(25.0).vh;
  for (double t = 26.0; t <= 125.0; t += 1.0) {
    const DeviceParams p = tm.params_at(t);
    CHECK(p.tmr0 < prev_tmr0);
    CHECK(p.vh < prev_vh);
    prev_tmr0 = p.tmr0;
    prev_vh = p.vh;
  }
}

TEST_CASE("thermal model rejects malformed anchor lists") {
  CHECK_THROWS_AS(ThermalModel({{25.0, 1.0, 0.3}}, 10e3), std::invalid_argument);
  CHECK_THROWS_AS(ThermalModel({{25.0, 1.0, 0.3}, {25.0, 0.7, 0.22}}, 10e3),
                  std::invalid_argument);
  CHECK_THROWS_AS(ThermalModel({{125.0, 1.0, 0.3}, {25.0, 0.7, 0.22}}, 10e3),
                  std::invalid_argument);
  CHECK_THROWS_AS(ThermalModel({{25.0, -1.0, 0.3}, {125.0, 0.7, 0.22}}, 10e3),
                  std::invalid_argument);
  CHECK_THROWS_AS(ThermalModel({{25.0, 1.0, 0.3}, {125.0, 0.7, 0.22}}, -10e3),
                  std::invalid_argument);
}

TEST_CASE("constant thermal model holds parameters over the full range") {
  const ThermalModel tm = ThermalModel::constant(kNominal);
  for (double t = -40.0; t <= 125.0; t += 5.0) {
    const DeviceParams p = tm.params_at(t);
    CHECK(p.tmr0 == kNominal.tmr0);
    CHECK(p.vh == kNominal.vh);
    CHECK(p.rp == kNominal.rp);
  }
}

TEST_CASE("device parameter validation") {
  CHECK_NOTHROW(validate(kNominal));
  CHECK_THROWS_AS(validate(DeviceParams{0.0, 0.3, 10e3}), std::invalid_argument);
  CHECK_THROWS_AS(validate(DeviceParams{1.0, 0.0, 10e3}), std::invalid_argument);
  CHECK_THROWS_AS(validate(DeviceParams{1.0, 0.3, 0.0}), std::invalid_argument);
}
