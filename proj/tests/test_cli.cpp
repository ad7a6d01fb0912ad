#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "commands.hpp"
#include "sdforest/features.hpp"
#include "sdforest/tensor_io.hpp"
#include "synthetic.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace sdf;
using sdf::testing::TempDir;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "sdforest");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = sdf::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string frame_name(int n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%05d.png", n);
  return buf;
}

// Writes a short moving-disk sequence: frames/, gt/ and the prompt mask.
void write_sequence(const TempDir& dir, int frames) {
  sdf::testing::DiskParams p;
  p.width = 80;
  p.height = 72;
  p.frames = frames;
  p.radius = 12;
  p.start_x = 30;
  p.start_y = 34;
  p.vx = 1.5;
  p.vy = 0.5;
  p.wobble = 2;
  const auto seq = sdf::testing::moving_disk(p);
  fs::create_directories(dir / "frames");
  fs::create_directories(dir / "gt");
  for (int n = 0; n < frames; ++n) {
    write_image(seq.frames[n], dir / "frames" / frame_name(n));
    write_mask(seq.masks[n], dir / "gt" / frame_name(n));
  }
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::vector<std::string> kFastSettings = {"--set", "forest.trees=6", "--set", "slic.k=50",
                                                "--set", "igf.radius=4"};

}  // namespace

TEST(Cli, BoundsTreeReferenceValue) {
  const auto r = run_cli({"bounds", "tree", "-Q", "1000", "-J", "219", "-m", "82335", "--delta", "0.05"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("0.1812"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("constants set to 1"), std::string::npos) << r.out;
}

TEST(Cli, BoundsOtherCalculators) {
  auto r = run_cli({"bounds", "vc", "-W", "2.3e7", "-U", "50"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("1.49948"), std::string::npos) << r.out;
  r = run_cli({"bounds", "margin", "-m", "100", "-B", "2", "-C", "1", "--rademacher", "0.01"});
  EXPECT_EQ(r.code, 0) << r.err;
  r = run_cli({"bounds", "margin", "-B", "0.5"});
  EXPECT_EQ(r.code, sdf::cli::kExitData);
  r = run_cli({"bounds", "diversity", "-L", "1", "-K", "10", "-m", "100"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("L^2 ln(K)/nu"), std::string::npos) << r.out;
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, sdf::cli::kExitUsage);
  EXPECT_EQ(run_cli({"segment", "--frames", "x"}).code, sdf::cli::kExitUsage);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(Cli, VizRoundsHalfUp) {
  TempDir dir;
  write_tensor(Tensor{{3, 4}, std::vector<float>(12, 0.5f)}, dir / "c.sdft");
  const auto r = run_cli({"viz", "--input", (dir / "c.sdft").string(), "--out", (dir / "c.png").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const ImageFrame img = read_image(dir / "c.png");
  ASSERT_EQ(img.width, 4);
  ASSERT_EQ(img.height, 3);
  for (auto v : img.data) EXPECT_EQ(v, 128);

  Tensor two{{2, 1, 2}, {0.0f, 1.0f, 0.25f, 2.0f}};
  write_tensor(two, dir / "s.sdft");
  ASSERT_EQ(run_cli({"viz", "--input", (dir / "s.sdft").string(), "--out", (dir / "s.png").string(), "--channel", "1"})
                .code,
            0);
  const ImageFrame s = read_image(dir / "s.png");
  EXPECT_EQ(s.at(0, 0, 0), 64);
  EXPECT_EQ(s.at(1, 0, 0), 255);
}

TEST(Cli, SegmentThenEvaluate) {
  TempDir dir;
  write_sequence(dir, 6);
  std::vector<std::string> args = {"segment", "--frames", (dir / "frames").string(), "--mask",
                                   (dir / "gt" / frame_name(0)).string(), "--out", (dir / "out").string(),
                                   "--seed", "4", "--dump-confidence"};
  args.insert(args.end(), kFastSettings.begin(), kFastSettings.end());
  const auto r = run_cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  for (int n = 0; n < 6; ++n) EXPECT_TRUE(fs::exists(dir / "out" / frame_name(n)));
  EXPECT_EQ(read_mask(dir / "out" / frame_name(0)), read_mask(dir / "gt" / frame_name(0)));
  const std::string timing = read_text(dir / "out" / "timing.txt");
  EXPECT_NE(timing.find("frames_per_second: "), std::string::npos);
  EXPECT_NE(timing.find("superpixel_ms: "), std::string::npos);
  const Tensor conf = read_tensor(dir / "out" / "confidence" / "00003.sdft");
  EXPECT_EQ(conf.dims, (std::vector<std::uint32_t>{1, 72, 80}));

  const auto e = run_cli({"eval", "--pred", (dir / "out").string(), "--gt", (dir / "gt").string(), "--report",
                          (dir / "report.txt").string()});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_TRUE(fs::exists(dir / "report.txt.json"));
  EXPECT_NE(read_text(dir / "report.txt").find("frames_per_second"), std::string::npos);
}

TEST(Cli, SegmentIsDeterministic) {
  TempDir dir;
  write_sequence(dir, 4);
  for (const char* out : {"a", "b"}) {
    std::vector<std::string> args = {"segment", "--frames", (dir / "frames").string(), "--mask",
                                     (dir / "gt" / frame_name(0)).string(), "--out", (dir / out).string()};
    args.insert(args.end(), kFastSettings.begin(), kFastSettings.end());
    ASSERT_EQ(run_cli(args).code, 0);
  }
  for (int n = 0; n < 4; ++n) {
    EXPECT_EQ(sdf::testing::read_bytes(dir / "a" / frame_name(n)), sdf::testing::read_bytes(dir / "b" / frame_name(n)));
  }
}

TEST(Cli, SingleFrameOutputEqualsPrompt) {
  TempDir dir;
  write_sequence(dir, 1);
  const auto r = run_cli({"segment", "--frames", (dir / "frames").string(), "--mask",
                          (dir / "gt" / frame_name(0)).string(), "--out", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_mask(dir / "out" / frame_name(0)), read_mask(dir / "gt" / frame_name(0)));
}

TEST(Cli, ExternalFeaturesAndChannelMismatch) {
  TempDir dir;
  write_sequence(dir, 3);
  ASSERT_EQ(run_cli({"features", "--frames", (dir / "frames").string(), "--out", (dir / "feat").string()}).code, 0);
  const auto inspect = run_cli({"features", "--inspect", (dir / "feat" / "00001.sdft").string()});
  EXPECT_EQ(inspect.code, 0);
  EXPECT_NE(inspect.out.find("dims: 11 72 80"), std::string::npos) << inspect.out;

  std::vector<std::string> base = {"segment", "--frames", (dir / "frames").string(), "--mask",
                                   (dir / "gt" / frame_name(0)).string(), "--features", (dir / "feat").string()};
  base.insert(base.end(), kFastSettings.begin(), kFastSettings.end());
  auto ok = base;
  ok.insert(ok.end(), {"--out", (dir / "ok").string()});
  EXPECT_EQ(run_cli(ok).code, 0);

  // Frame 2 gets a tensor with the wrong channel count.
  write_tensor(Tensor{{5, 72, 80}, std::vector<float>(5 * 72 * 80, 0.1f)}, dir / "feat" / "00002.sdft");
  auto bad = base;
  bad.insert(bad.end(), {"--out", (dir / "bad").string()});
  const auto r = run_cli(bad);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("00002.png"), std::string::npos) << r.err;

  fs::remove(dir / "feat" / "00001.sdft");
  const auto missing = run_cli(bad);
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("00001.png"), std::string::npos) << missing.err;
}

TEST(Cli, MissingPromptAndBadConfig) {
  TempDir dir;
  write_sequence(dir, 2);
  auto r = run_cli({"segment", "--frames", (dir / "frames").string(), "--mask", (dir / "nope.png").string(), "--out",
                    (dir / "out").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("nope.png"), std::string::npos);
  r = run_cli({"segment", "--frames", (dir / "frames").string(), "--mask", (dir / "gt" / frame_name(0)).string(),
               "--out", (dir / "out").string(), "--set", "forest.tress=3"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("unknown config key"), std::string::npos);
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "slic.k = 40\nforest.trees = 3\nigf.radius = 3\n";
  }
  r = run_cli({"segment", "--frames", (dir / "frames").string(), "--mask", (dir / "gt" / frame_name(0)).string(),
               "--out", (dir / "out").string(), "--config", (dir / "run.cfg").string(), "--set", "forest.trees=2"});
  EXPECT_EQ(r.code, 0) << r.err;
  const std::string used = read_text(dir / "out" / "config.txt");
  EXPECT_NE(used.find("forest.trees = 2"), std::string::npos) << used;
  EXPECT_NE(used.find("slic.k = 40"), std::string::npos) << used;
}

TEST(Cli, EvalOnIdenticalDirectories) {
  TempDir dir;
  write_sequence(dir, 4);
  const auto r = run_cli({"eval", "--pred", (dir / "gt").string(), "--gt", (dir / "gt").string(), "--report",
                          (dir / "r.txt").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("J_mean: 1"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("F_mean: 1"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("J_decay: 0"), std::string::npos) << r.out;
}
