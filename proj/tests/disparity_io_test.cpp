// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "ffusion/disparity_io.hpp"
#include "ffusion/error.hpp"

namespace ffusion {
namespace {

namespace fs = std::filesystem;

class DisparityIo : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ffusion_disp_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
};

DisparityMap sample_map(bool quantised) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> d(0.5, 200.0);
  DisparityMap m(37, 11);
  for (int v = 0; v < 11; ++v) {
    for (int u = 0; u < 37; ++u) {
      if ((u + v) % 3 == 0) continue;
      const double value = d(rng);
      m.set(u, v, quantised ? std::round(value * 256.0) / 256.0 : static_cast<float>(value));
    }
  }
  return m;
}

void expect_same(const DisparityMap& a, const DisparityMap& b) {
  ASSERT_EQ(a.size(), b.size());
  for (int v = 0; v < a.height(); ++v) {
    for (int u = 0; u < a.width(); ++u) {
      ASSERT_EQ(a.valid(u, v), b.valid(u, v)) << u << "," << v;
      if (a.valid(u, v)) ASSERT_EQ(a.value(u, v), b.value(u, v)) << u << "," << v;
    }
  }
}

TEST_F(DisparityIo, PngRoundTrip) {
  const DisparityMap m = sample_map(true);
  write_disparity_png(m, dir_ / "d.png");
  expect_same(m, read_disparity_png(dir_ / "d.png"));
  expect_same(m, read_disparity(dir_ / "d.png"));
}

TEST_F(DisparityIo, PngPixelValueOver256IsDisparity) {
  DisparityMap m(2, 1);
  m.set(1, 0, 1000.0 / 256.0);
  write_disparity_png(m, dir_ / "d.png");
  const DisparityMap back = read_disparity_png(dir_ / "d.png");
  EXPECT_FALSE(back.valid(0, 0));
  EXPECT_DOUBLE_EQ(back.value(1, 0), 3.90625);
}

TEST_F(DisparityIo, PngRejectsUnrepresentableValues) {
  DisparityMap m(2, 1);
  m.set(0, 0, 300.0);
  EXPECT_THROW(write_disparity_png(m, dir_ / "d.png"), Error);
}

TEST_F(DisparityIo, RawRoundTripAndHeaderLayout) {
  const DisparityMap m = sample_map(false);
  write_disparity_raw(m, dir_ / "d.disp");
  EXPECT_EQ(fs::file_size(dir_ / "d.disp"), 16u + 37u * 11u * 4u);
  std::ifstream in(dir_ / "d.disp", std::ios::binary);
  char header[16];
  in.read(header, 16);
  EXPECT_EQ(std::string(header, 4), "DISP");
  std::uint32_t w, h, reserved;
  std::memcpy(&w, header + 4, 4);
  std::memcpy(&h, header + 8, 4);
  std::memcpy(&reserved, header + 12, 4);
  EXPECT_EQ(w, 37u);
  EXPECT_EQ(h, 11u);
  EXPECT_EQ(reserved, 0u);
  expect_same(m, read_disparity_raw(dir_ / "d.disp"));
  expect_same(m, read_disparity(dir_ / "d.disp"));
}

TEST_F(DisparityIo, RawRejectsCorruptFiles) {
  {
    std::ofstream out(dir_ / "magic.disp", std::ios::binary);
    out << "NOPE0000000000000000";
  }
  EXPECT_THROW(read_disparity_raw(dir_ / "magic.disp"), ParseError);
  EXPECT_THROW(read_disparity(dir_ / "magic.disp"), ParseError);

  write_disparity_raw(sample_map(false), dir_ / "short.disp");
  fs::resize_file(dir_ / "short.disp", fs::file_size(dir_ / "short.disp") - 3);
  EXPECT_THROW(read_disparity_raw(dir_ / "short.disp"), ParseError);

  EXPECT_THROW(read_disparity(dir_ / "missing.disp"), IoError);
}

}  // namespace
}  // namespace ffusion
