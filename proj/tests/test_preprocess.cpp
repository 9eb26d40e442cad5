#include <cmath>

#include "atnet/common/error.hpp"
#include "atnet/preprocess/augment.hpp"
#include "atnet/preprocess/frame.hpp"
#include "atnet/preprocess/window.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace atnet;
using namespace atnet::pre;

namespace {

Image ramp(int rows, int cols) {
  Image g(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) g(r, c) = (r * cols + c) / double(rows * cols);
  return g;
}

std::vector<Image> constant_frames(int n) {
  std::vector<Image> out;
  for (int i = 0; i < n; ++i) out.emplace_back(2, 2, double(i));
  return out;
}

}  // namespace

TEST_CASE("gray conversion uses rec601 weights") {
  data::Frame f;
  f.height = 1;
  f.width = 2;
  f.channels = 3;
  f.pixels = {255, 0, 0, 10, 200, 30};
  auto g = to_gray(f);
  CHECK(g(0, 0) == doctest::Approx(0.299).epsilon(1e-12));
  CHECK(g(0, 1) == doctest::Approx((0.299 * 10 + 0.587 * 200 + 0.114 * 30) / 255.0).epsilon(1e-12));
  CHECK(to_gray(test_util::gray_frame(2, 2, 51))(1, 1) == doctest::Approx(0.2));
}

TEST_CASE("same-size resize is an exact copy") {
  auto g = ramp(7, 5);
  CHECK(resize_bilinear(g, 7, 5) == g);
}

TEST_CASE("halving a 2x2 block averages it") {
  Image g(2, 2, std::vector<double>{0.0, 1.0, 0.5, 0.25});
  auto s = resize_bilinear(g, 1, 1);
  CHECK(s(0, 0) == doctest::Approx(0.4375));
}

TEST_CASE("bilinear upsampling of a linear ramp stays linear inside") {
  Image g(1, 4, std::vector<double>{0.0, 1.0, 2.0, 3.0});
  auto up = resize_bilinear(g, 1, 8);
  // output c samples source (c + 0.5) / 2 - 0.5, clamped
  for (int c = 1; c < 7; ++c) CHECK(up(0, c) == doctest::Approx((c + 0.5) / 2.0 - 0.5));
  CHECK(up(0, 0) == 0.0);
  CHECK(up(0, 7) == 3.0);
}

TEST_CASE("normalize_frame crops to the bbox") {
  auto f = test_util::gray_frame(10, 10, 0);
  for (int r = 2; r < 6; ++r)
    for (int c = 3; c < 7; ++c) f.pixels[r * 10 + c] = 255;
  auto img = normalize_frame(f, data::BBox{3, 2, 4, 4}, 4);
  for (double v : img.values()) CHECK(v == 1.0);
  CHECK_THROWS_AS(normalize_frame(f, data::BBox{8, 8, 4, 4}, 4), DataError);
  CHECK_THROWS_AS(normalize_frame(f, data::BBox{0, 0, 0, 4}, 4), DataError);
  CHECK(normalize_frame(f, std::nullopt, 10).rows() == 10);
}

TEST_CASE("window copies frames verbatim when the clip is long enough") {
  auto frames = constant_frames(80);
  auto w = select_window(frames, 40, 32);
  REQUIRE(w.frames.size() == 65);
  CHECK(w.apex_position == 32);
  CHECK_FALSE(w.interpolated);
  for (int k = 0; k < 65; ++k) CHECK(w.frames[k](0, 0) == double(8 + k));
}

TEST_CASE("short sides are resampled linearly and the apex stays centred") {
  auto frames = constant_frames(20);
  auto w = select_window(frames, 4, 8);
  REQUIRE(w.frames.size() == 17);
  CHECK(w.interpolated);
  CHECK(w.frames[8](0, 0) == 4.0);
  CHECK(w.frames[0](0, 0) == 0.0);
  // left side has 4 frames before the apex stretched over 8 slots
  CHECK(w.frames[4](0, 0) == doctest::Approx(2.0));
  CHECK(w.frames[5](0, 0) == doctest::Approx(2.5));
  // right side has 15 frames available, so it is copied verbatim
  for (int k = 9; k < 17; ++k) CHECK(w.frames[k](0, 0) == double(k - 4));
}

TEST_CASE("an apex on the first frame repeats it on the left side") {
  auto w = select_window(constant_frames(40), 0, 4);
  for (int k = 0; k <= 4; ++k) CHECK(w.frames[k](0, 0) == 0.0);
}

TEST_CASE("window rejects bad inputs") {
  CHECK_THROWS(select_window({}, 0, 4));
  CHECK_THROWS(select_window(constant_frames(5), 7, 4));
}

TEST_CASE("shift bound scales with frame size") {
  CHECK(AugmentParams::for_size(224).max_shift_px == 10);
  CHECK(AugmentParams::for_size(32).max_shift_px == 1);
  CHECK(AugmentParams::for_size(112).max_shift_px == 5);
}

TEST_CASE("integer shifts move content exactly") {
  auto g = ramp(6, 6);
  auto s = warp(g, 0.0, 1, 2);
  for (int r = 2; r < 6; ++r)
    for (int c = 1; c < 6; ++c) CHECK(s(r, c) == g(r - 2, c - 1));
  CHECK(warp(g, 0.0, 0, 0) == g);
}

TEST_CASE("a 90 degree rotation of a symmetric image about its centre") {
  Image g(5, 5, 0.0);
  g(2, 2) = 1.0;
  g(0, 2) = 0.5;
  auto rot = warp(g, 90.0, 0, 0);
  CHECK(rot(2, 2) == doctest::Approx(1.0));
  // the top-centre pixel lands on a side-centre pixel
  CHECK(std::max(rot(2, 0), rot(2, 4)) == doctest::Approx(0.5));
  CHECK(rot(0, 2) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("augment with probability zero is the identity and is seeded") {
  auto g = ramp(8, 8);
  AugmentParams never{5.0, 1, 0.0};
  Rng rng(1);
  CHECK(augment(g, never, rng) == g);
  AugmentParams always{5.0, 1, 1.0};
  Rng a(9), b(9);
  CHECK(augment(g, always, a) == augment(g, always, b));
}
