#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "emotioncarrier/rng.hpp"
#include "emotioncarrier/telemetry.hpp"
#include "support/generators.hpp"
#include "support/malformed_corpus.hpp"

using namespace emoc;

TEST_CASE("encode_frame emits the exact wire line") {
  SensorFrame f;
  f.device_id = "carrier-01";
  f.channel = Channel::pressure_raw;
  f.timestamp_ms = 1700000000123;
  f.value = 12600;
  f.seq = 42;

  auto line = encode_frame(f);
  REQUIRE(line.ok());
  CHECK(line.value() ==
        "{\"v\":1,\"device\":\"carrier-01\",\"ch\":\"pressure_raw\",\"ts\":1700000000123,"
        "\"val\":12600,\"seq\":42}\n");
}

TEST_CASE("encode_frame omits seq when absent and escapes the device id") {
  SensorFrame f;
  f.device_id = "a\"b\nc";
  f.channel = Channel::audio_rms;
  f.timestamp_ms = 5;
  f.value = 0.25;

  auto line = encode_frame(f);
  REQUIRE(line.ok());
  CHECK(line.value() == "{\"v\":1,\"device\":\"a\\\"b\\nc\",\"ch\":\"audio_rms\",\"ts\":5,"
                        "\"val\":0.25}\n");
  CHECK(line.value().find('\n') == line.value().size() - 1);  // no interior newline
}

TEST_CASE("encode_frame refuses invalid frames") {
  SensorFrame f;
  f.device_id = "d";
  f.channel = Channel::audio_rms;
  f.timestamp_ms = 0;
  f.value = 1.5;
  CHECK_FALSE(encode_frame(f).ok());

  f.value = std::nan("");
  CHECK_FALSE(encode_frame(f).ok());

  f.value = 0.5;
  f.timestamp_ms = -1;
  CHECK_FALSE(encode_frame(f).ok());

  f.timestamp_ms = 0;
  f.device_id = "";
  CHECK_FALSE(encode_frame(f).ok());
}

TEST_CASE("decode_frame round-trips the documented example") {
  const std::string line =
      "{\"v\":1,\"device\":\"carrier-01\",\"ch\":\"pressure_raw\",\"ts\":1700000000123,"
      "\"val\":12600,\"seq\":42}\n";
  auto frame = decode_frame(line);
  REQUIRE(frame.ok());
  CHECK(frame.value().device_id == "carrier-01");
  CHECK(frame.value().channel == Channel::pressure_raw);
  CHECK(frame.value().timestamp_ms == 1700000000123);
  CHECK(frame.value().value == 12600.0);
  CHECK(frame.value().seq == 42u);
}

TEST_CASE("decode_frame accepts any key order, whitespace and unknown keys") {
  auto frame = decode_frame(
      R"( { "seq": 1, "val": 0.5, "ts": 9, "extra": {"ignored": true}, "ch": "audio_rms", "device": "d", "v": 1 } )");
  REQUIRE(frame.ok());
  CHECK(frame.value().channel == Channel::audio_rms);
  CHECK(frame.value().value == 0.5);
}

TEST_CASE("malformed corpus maps to the designated typed errors") {
  const auto corpus = testsupport::malformed_corpus();
  REQUIRE(corpus.size() >= 10);
  for (const auto& c : corpus) {
    CAPTURE(c.line);
    auto frame = decode_frame(c.line);
    REQUIRE_FALSE(frame.ok());
    CHECK(frame.error().kind == c.expected);
  }
}

TEST_CASE("random valid frames round-trip exactly" * doctest::timeout(30)) {
  SplitMix64 rng(0xC0FFEE);
  for (int i = 0; i < 10000; ++i) {
    const SensorFrame f = gen::random_frame(rng);
    CAPTURE(i);
    auto line = encode_frame(f);
    REQUIRE(line.ok());
    auto back = decode_frame(line.value());
    REQUIRE(back.ok());
    // bit-exact value comparison, not just ==
    CHECK(std::memcmp(&back.value().value, &f.value, sizeof(double)) == 0);
    CHECK(back.value() == f);
  }
}

TEST_CASE("calibrate_pressure is the documented affine map") {
  const CalibrationProfile p("carrier-01", 8400.0, 420.0);
  CHECK(calibrate_pressure(8400.0, p) == 0.0);            // tare point
  CHECK(calibrate_pressure(12600.0, p) == doctest::Approx(10.0));
  CHECK(calibrate_pressure(8190.0, p) == doctest::Approx(-0.5));  // negative force pre-clamp
}

TEST_CASE("calibrate_pressure differences scale by 1/scale") {
  const CalibrationProfile p("d", 1234.5, 73.2);
  SplitMix64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const double a = (rng.next_unit() - 0.5) * 2e6;
    const double b = (rng.next_unit() - 0.5) * 2e6;
    const double lhs = calibrate_pressure(a, p) - calibrate_pressure(b, p);
    const double rhs = (a - b) / p.scale_counts_per_gf;
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("calibration profile rejects a zero scale") {
  CHECK_THROWS_AS(CalibrationProfile("d", 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("channel ranges guard the open physiological bounds") {
  CHECK_FALSE(value_in_range(Channel::heart_rate, 20.0));
  CHECK(value_in_range(Channel::heart_rate, 20.001));
  CHECK_FALSE(value_in_range(Channel::heart_rate, 250.0));
  CHECK_FALSE(value_in_range(Channel::respiratory_rate, 2.0));
  CHECK_FALSE(value_in_range(Channel::respiratory_rate, 60.0));
  CHECK(value_in_range(Channel::audio_rms, 0.0));
  CHECK(value_in_range(Channel::audio_rms, 1.0));
  CHECK(value_in_range(Channel::pressure_raw, -8388608.0));
  CHECK(value_in_range(Channel::pressure_raw, 8388607.0));
  CHECK_FALSE(value_in_range(Channel::pressure_raw, 8388608.0));
  CHECK(clamp_to_range(Channel::heart_rate, 10.0) > 20.0);
  CHECK(clamp_to_range(Channel::heart_rate, 10.0) < 20.001);
}
