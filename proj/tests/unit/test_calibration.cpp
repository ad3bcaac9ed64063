// Copyright 2026 The wheelsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "wheelsim/calibration.hpp"
#include "wheelsim/rng.hpp"

using namespace wheelsim;
using namespace wheelsim::calibration;

namespace {

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace

TEST_SUITE("calibration") {
  TEST_CASE("two point fit examples") {
    const auto id = two_point_fit(0, 0, 100, 100);
    CHECK(id.gain == 1.0);
    CHECK(id.offset == 0.0);
    CHECK(apply_calibration(id, 42) == 42.0);

    // Solving g*2 + o = 0 and g*97.5 + o = 100 by Cramer's rule.
    const double det = 2.0 * 1.0 - 97.5 * 1.0;
    const double g = (0.0 * 1.0 - 100.0 * 1.0) / det;
    const double o = (2.0 * 100.0 - 97.5 * 0.0) / det;
    const auto ice = two_point_fit(2.0, 0.0, 97.5, 100.0);
    CHECK(ice.gain == doctest::Approx(g).epsilon(1e-12));
    CHECK(ice.offset == doctest::Approx(o).epsilon(1e-12));
    CHECK(ice.gain == doctest::Approx(1.04712).epsilon(1e-5));
    CHECK(ice.offset == doctest::Approx(-2.09424).epsilon(1e-5));
    CHECK(apply_calibration(ice, 2.0) == doctest::Approx(0.0));
    CHECK(apply_calibration(ice, 50.0) == doctest::Approx(50.262).epsilon(1e-4));
    CHECK(apply_calibration(ice, 50.0) == doctest::Approx(g * 50.0 + o).epsilon(1e-12));

    const auto accel = two_point_fit(-250, -1, 250, 1);
    CHECK(accel.gain == doctest::Approx(0.004));
    CHECK(accel.offset == doctest::Approx(0.0));
  }

  TEST_CASE("degenerate anchors are refused") {
    try {
      two_point_fit(5, 1, 5, 2);
      FAIL("expected DegenerateAnchors");
    } catch (const Error& e) {
      CHECK(e.code() == "DegenerateAnchors");
    }
  }

  TEST_CASE("fit recovers random linear sensors and reproduces its anchors") {
    Rng rng(21);
    for (int i = 0; i < 10000; ++i) {
      const double g = rng.uniform(0.01, 10.0) * (rng.bernoulli(0.5) ? 1 : -1);
      const double o = rng.uniform(-500.0, 500.0);
      const double a = rng.uniform(-1000.0, 1000.0);
      double b = rng.uniform(-1000.0, 1000.0);
      if (std::abs(b - a) < 1.0) b = a + 10.0;
      const auto c = two_point_fit(a, g * a + o, b, g * b + o);
      CHECK(rel_close(c.gain, g, 1e-9));
      CHECK(rel_close(c.offset, o, 1e-9));
      CHECK(rel_close(apply_calibration(c, a), g * a + o, 1e-9));
      CHECK(rel_close(apply_calibration(c, b), g * b + o, 1e-9));
    }
  }

  TEST_CASE("calibration is strictly monotone for positive gain") {
    const auto c = two_point_fit(1260, 60, 2460, 120);
    double prev = -1e300;
    for (double raw = 0; raw < 6000; raw += 0.5) {
      const double v = apply_calibration(c, raw);
      CHECK(v > prev);
      prev = v;
    }
  }

  TEST_CASE("temperature quantization") {
    CHECK(quantize_temperature(37.0, 12) == 37.0);
    CHECK(quantize_temperature(37.02, 12) == 37.0);
    CHECK(quantize_temperature(36.8, 9) == 37.0);
    // Ties go to the even step: 0.25 is half way between 0 and 0.5.
    CHECK(quantize_temperature(0.25, 9) == 0.0);
    CHECK(quantize_temperature(0.75, 9) == 1.0);
    CHECK_THROWS_AS(quantize_temperature(126, 12), Error);
    CHECK_THROWS_AS(quantize_temperature(-56, 12), Error);
    CHECK_THROWS_AS(quantize_temperature(20, 8), Error);

    Rng rng(3);
    for (int bits = 9; bits <= 12; ++bits) {
      const double step = 0.5 / (1 << (bits - 9));
      for (int i = 0; i < 5000; ++i) {
        const double x = rng.uniform(-55.0, 125.0);
        const double q = quantize_temperature(x, bits);
        CHECK(std::abs(q - x) <= step / 2 + 1e-12);
        CHECK(std::abs(q / step - std::round(q / step)) < 1e-9);
      }
    }
  }

  TEST_CASE("accelerometer quantization") {
    CHECK(quantize_accel(0) == 0);
    CHECK(quantize_accel(1) == 250);
    CHECK(quantize_accel(-1) == -250);
    CHECK(quantize_accel(100) == kAccelMaxCounts);
    CHECK(quantize_accel(-100) == kAccelMinCounts);
    Rng rng(8);
    for (int i = 0; i < 5000; ++i) {
      const double g = rng.uniform(-16, 16);
      const int c = quantize_accel(g);
      if (c > kAccelMinCounts && c < kAccelMaxCounts) CHECK(std::abs(c * 0.004 - g) <= 0.002 + 1e-12);
    }
  }

  TEST_CASE("calibrate clamps to the physical range") {
    const auto c = two_point_fit(0, 0, 1, 1);
    const auto ok = calibrate(VitalKind::SpO2, c, {"spo2", 5, 97});
    CHECK(ok.value == 97);
    CHECK(ok.quality == Quality::Ok);
    const auto hi = calibrate(VitalKind::SpO2, c, {"spo2", 5, 104});
    CHECK(hi.value == 100);
    CHECK(hi.quality == Quality::Suspect);
    CHECK(calibrate(VitalKind::HeartRate, c, {"hr", 0, -3}).value == 0);
  }

  TEST_CASE("resting heart rate without noise is constant 72 bpm") {
    const auto trace = generate_vital_trace(VitalKind::HeartRate, "resting", {0.0}, {10'000, 1000, 1});
    REQUIRE(trace.size() == 10);
    const auto sensor = default_sensor(VitalKind::HeartRate);
    for (const auto& s : trace) {
      CHECK(s.channel == "hr");
      CHECK(calibrate(VitalKind::HeartRate, sensor.truth, s).value == doctest::Approx(72.0));
    }
  }

  TEST_CASE("profiles stay within their published ranges") {
    const auto hr = default_sensor(VitalKind::HeartRate);
    for (const auto& s : generate_vital_trace(VitalKind::HeartRate, "paper-range", {0.0},
                                              {600'000, 500, 1})) {
      const double v = apply_calibration(hr.truth, s.raw);
      CHECK(v >= 60.0 - 0.05);
      CHECK(v <= 100.0 + 0.05);
    }
    const auto temp = default_sensor(VitalKind::Temperature);
    for (const auto& s : generate_vital_trace(VitalKind::Temperature, "cohort", {0.0},
                                              {600'000, 500, 1})) {
      const double v = apply_calibration(temp.truth, s.raw);
      CHECK(v >= 35.3 - 0.07);
      CHECK(v <= 38.1 + 0.07);
    }
    for (Millis t = 0; t < 600'000; t += 250) {
      const double v = profile_value(VitalKind::SpO2, "cohort", t);
      CHECK(v >= 93.0);
      CHECK(v <= 100.0);
    }
  }

  TEST_CASE("generated traces are deterministic per seed") {
    const auto a = generate_vital_trace(VitalKind::SpO2, "cohort", {0.5}, {60'000, 1000, 42});
    const auto b = generate_vital_trace(VitalKind::SpO2, "cohort", {0.5}, {60'000, 1000, 42});
    const auto c = generate_vital_trace(VitalKind::SpO2, "cohort", {0.5}, {60'000, 1000, 43});
    CHECK(a == b);
    CHECK(a != c);
  }

  TEST_CASE("unknown profiles and bad durations") {
    try {
      generate_vital_trace(VitalKind::HeartRate, "sprinting", {0.0}, {});
      FAIL("expected UnknownProfile");
    } catch (const Error& e) {
      CHECK(e.code() == "UnknownProfile");
    }
    CHECK_THROWS_AS(generate_vital_trace(VitalKind::HeartRate, "resting", {0.0}, {0, 1000, 1}),
                    Error);
    CHECK(profile_value(VitalKind::HeartRate, "constant:150", 0) == 150.0);
    CHECK_THROWS_AS(profile_value(VitalKind::HeartRate, "constant:abc", 0), Error);
  }

  TEST_CASE("bundled calibration files match the sensor models") {
    for (auto kind : {VitalKind::HeartRate, VitalKind::SpO2, VitalKind::Temperature}) {
      const auto file = oracle::fixture_dir() / "calibration" / (channel_name(kind) + ".json");
      const auto c = load_calibration(file);
      const auto truth = default_sensor(kind).truth;
      CHECK(c.gain == truth.gain);
      CHECK(c.offset == truth.offset);
      CHECK(c.channel == channel_name(kind));
      CHECK(apply_calibration(c, c.refs[0].raw) == doctest::Approx(c.refs[0].reference));
      CHECK(apply_calibration(c, c.refs[1].raw) == doctest::Approx(c.refs[1].reference));
    }
  }

  TEST_CASE("calibration json round trip") {
    const auto c = two_point_fit(8850, 90, 9750, 99, "spo2");
    const auto path = oracle::scratch_dir("calibration") / "c.json";
    save_calibration(path, c);
    const auto back = load_calibration(path);
    CHECK(back.gain == c.gain);
    CHECK(back.offset == c.offset);
    CHECK(back.refs == c.refs);
    CHECK_THROWS_AS(json::parse(R"({"channel":"x","gain":0,"offset":1,"refs":[[0,0],[1,1]]})")
                        .get<CalibrationCoefficients>(),
                    Error);
  }
}
