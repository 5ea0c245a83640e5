#include <doctest.h>

#include <numbers>
#include <random>

#include "exocap/error.hpp"
#include "exocap/retarget.hpp"

using namespace exocap;

namespace {

const std::string kFixtures = EXOCAP_FIXTURES;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exocap::Error");
  return ErrorCode::InvalidArgument;
}

std::vector<std::size_t> identity_assignment(std::size_t n) {
  std::vector<std::size_t> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = i;
  return a;
}

}  // namespace

TEST_CASE("fixture hand models load") {
  const auto inspire = load_hand_model_file(kFixtures + "/hands/inspire6.hand");
  CHECK(inspire.name == "inspire6");
  CHECK(inspire.dof() == 6);
  CHECK(inspire.joints[5].name == "thumb_rotate");
  CHECK(inspire.joints[5].upper == 1.30);
  CHECK(load_hand_model_file(kFixtures + "/hands/allegro16.hand").dof() == 16);
  CHECK(load_hand_model_file(kFixtures + "/hands/gripper1.hand").dof() == 1);
  CHECK(code_of([] { load_hand_model_file("/nonexistent.hand"); }) == ErrorCode::IoError);
}

TEST_CASE("hand config errors") {
  CHECK(code_of([] { load_hand_model("hand: h\njoint: a 0.5 0.5\n"); }) == ErrorCode::LimitOrderError);
  CHECK(code_of([] { load_hand_model("hand: h\njoint: a 1 0\n"); }) == ErrorCode::LimitOrderError);
  CHECK(code_of([] { load_hand_model("hand: h\njoint: a 0 1\njoint: a 0 2\n"); }) == ErrorCode::DuplicateJoint);
  CHECK(code_of([] { load_hand_model("hand: h\njoint: a 0\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { load_hand_model("hand: h\njoint: a zero 1\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { load_hand_model("hand: h\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { load_hand_model("joint: a 0 1\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { load_hand_model("hand: h\njoint: a 0 inf\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { load_hand_model("hand: h\nfinger: a 0 1\n"); }) == ErrorCode::ParseError);
}

TEST_CASE("two-pose calibration") {
  const double half_pi = std::numbers::pi / 2;
  HandModel model{"h", {{"a", 0, half_pi}, {"b", 0, half_pi}, {"c", 0, half_pi}}};
  const GloveFrame open{{0, 0, 0}};
  const GloveFrame closed{{1, 1, 1}};
  const auto map = calibrate_map(open, closed, identity_assignment(3), model);
  for (const auto& ch : map.joints) {
    CHECK(ch.gain == half_pi);
    CHECK(ch.offset == 0.0);
  }

  // Swapped extremes: open reads high, closed reads low.
  HandModel one{"g", {{"grip", -0.5, 1.5}}};
  const std::vector<std::size_t> a0{0};
  const auto swapped = calibrate_map(GloveFrame{{0.8}}, GloveFrame{{0.2}}, a0, one);
  CHECK(swapped.joints[0].gain == doctest::Approx(-2.0 / 0.6).epsilon(1e-15));
  CHECK(retarget(GloveFrame{{0.8}}, swapped, one).angles[0] == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(retarget(GloveFrame{{0.2}}, swapped, one).angles[0] == doctest::Approx(1.5).epsilon(1e-15));

  CHECK(code_of([&] { calibrate_map(GloveFrame{{0.3, 0, 0}}, GloveFrame{{0.3, 1, 1}}, identity_assignment(3), model); }) ==
        ErrorCode::DegenerateRange);
  CHECK(code_of([&] { calibrate_map(open, closed, std::vector<std::size_t>{0, 1, 5}, model); }) ==
        ErrorCode::SourceIndexOutOfRange);
  CHECK(code_of([&] { calibrate_map(open, closed, std::vector<std::size_t>{0, 1}, model); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("retarget hits limits, midpoints and clamps") {
  const auto model = load_hand_model_file(kFixtures + "/hands/inspire6.hand");
  const GloveFrame open{{0.1, 0.2, 0.1, 0.0, 0.3, 0.2, 9.0}};
  const GloveFrame closed{{1.1, 1.4, 0.9, 1.0, 0.8, 1.0, 9.0}};
  const auto map = calibrate_map(open, closed, identity_assignment(6), model);

  const auto at_open = retarget(open, map, model);
  for (std::size_t j = 0; j < 6; ++j) CHECK(at_open.angles[j] == doctest::Approx(model.joints[j].lower).epsilon(1e-12));

  GloveFrame mid;
  GloveFrame beyond;
  for (std::size_t c = 0; c < open.angles.size(); ++c) {
    mid.angles.push_back((open.angles[c] + closed.angles[c]) / 2);
    beyond.angles.push_back(closed.angles[c] + 0.5 * (closed.angles[c] - open.angles[c]));
  }
  const auto at_mid = retarget(mid, map, model);
  const auto at_beyond = retarget(beyond, map, model);
  for (std::size_t j = 0; j < 6; ++j) {
    CHECK(at_mid.angles[j] == doctest::Approx((model.joints[j].lower + model.joints[j].upper) / 2).epsilon(1e-12));
    CHECK(at_beyond.angles[j] == model.joints[j].upper);
  }
  CHECK(code_of([&] { retarget(GloveFrame{{0.1, 0.2}}, map, model); }) == ErrorCode::SourceIndexOutOfRange);
  CHECK(code_of([&] { retarget(GloveFrame{{0.1, 0.2, 0.1, NAN, 0.3, 0.2}}, map, model); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("retarget output is always valid, monotone and idempotent on extremes") {
  std::mt19937_64 rng(40);
  std::uniform_real_distribution<double> reading(-3.0, 3.0);
  for (const char* file : {"/hands/inspire6.hand", "/hands/allegro16.hand", "/hands/gripper1.hand"}) {
    const auto model = load_hand_model_file(kFixtures + file);
    const std::size_t channels = model.dof() + 2;
    GloveFrame open;
    GloveFrame closed;
    for (std::size_t c = 0; c < channels; ++c) {
      open.angles.push_back(reading(rng) * 0.2);
      closed.angles.push_back(open.angles.back() + (c % 3 == 2 ? -1.0 : 1.0));
    }
    std::vector<std::size_t> assignment;
    for (std::size_t j = 0; j < model.dof(); ++j) assignment.push_back((j * 5) % channels);
    const auto map = calibrate_map(open, closed, assignment, model);
    for (int i = 0; i < 1000; ++i) {
      GloveFrame f;
      for (std::size_t c = 0; c < channels; ++c) f.angles.push_back(reading(rng));
      const auto cmd = retarget(f, map, model);
      CHECK(is_valid(cmd, model));
      for (std::size_t j = 0; j < model.dof(); ++j) {
        if (map.joints[j].gain <= 0) continue;
        GloveFrame g = f;
        g.angles[map.joints[j].source] += std::abs(reading(rng));
        CHECK(retarget(g, map, model).angles[j] >= cmd.angles[j]);
      }
    }
    const auto once = retarget(closed, map, model);
    CHECK(retarget(closed, map, model) == once);
  }
}

TEST_CASE("hand command wire format") {
  const HandCommand cmd{{0.0, 1.5, -0.25}};
  const auto bytes = encode_hand_command(cmd);
  REQUIRE(bytes.size() == 24);
  CHECK(bytes[15] == std::byte{0x3F});  // 1.5 = 0x3FF8000000000000
  CHECK(bytes[14] == std::byte{0xF8});
  CHECK(decode_hand_command(bytes) == cmd);
  CHECK_THROWS_AS(decode_hand_command(std::span(bytes).first(23)), Error);
}
