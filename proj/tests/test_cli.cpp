#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "g2r/cli.hpp"
#include "synthetic.hpp"

using namespace g2r;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<fs::path> subdirs(const fs::path& p) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(p)) {
    if (e.is_directory()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_tiny_config(const fs::path& path, const fs::path& data, const fs::path& out) {
  std::ofstream f(path);
  f << "[train]\nepochs = 2\ndecay_start_epoch = 1\nseed = 5\nmax_steps = 3\n"
    << "[loss]\ntau = 3\n"
    << "[data]\nroot = " << data.string() << "\nload_size = 36\ncrop_size = 32\n"
    << "[model]\nbase_channels = 4\nresidual_blocks = 1\ndisc_channels = 4\n"
    << "[eval]\ntest_size = 32\n"
    << "[output]\ndir = " << out.string() << "\n";
}

}  // namespace

TEST_CASE("metrics command on identical directories reports zero error") {
  const auto root = testing::temp_dir("climetrics");
  testing::write_synthetic_split(root, "test", 3, 24, 24, 2);
  const int code = run_cli({"metrics", "--pred", (root / "test_C").string(), "--gt", (root / "test_C").string(),
                            "--mask", (root / "test_B").string(), "--output-dir", (root / "out").string()});
  CHECK(code == kExitOk);
  const auto runs = subdirs(root / "out");
  REQUIRE(runs.size() == 1);
  const std::string csv = read_file(runs[0] / "metrics.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    std::istringstream fields(line);
    std::string name, rmse_shadow, rmse_non, rmse_all;
    std::getline(fields, name, ',');
    std::getline(fields, rmse_shadow, ',');
    std::getline(fields, rmse_non, ',');
    std::getline(fields, rmse_all, ',');
    CHECK(std::stod(rmse_shadow) == 0.0);
    CHECK(std::stod(rmse_all) == 0.0);
  }
  CHECK(rows == 4);
  fs::remove_all(root);
}

TEST_CASE("usage errors exit with status 1, runtime failures with 2") {
  const auto root = testing::temp_dir("cliusage");
  CHECK(run_cli({}) == kExitUsage);
  CHECK(run_cli({"frobnicate"}) == kExitUsage);
  CHECK(run_cli({"infer", "--checkpoint", "x"}) == kExitUsage);
  std::ofstream(root / "bad.ini") << "[train]\nlearning_rate = 3\n";
  CHECK(run_cli({"train", "--config", (root / "bad.ini").string(), "--data-root", root.string()}) == kExitUsage);
  CHECK(run_cli({"train", "--set", "loss.w_gan=abc", "--data-root", root.string()}) == kExitUsage);
  CHECK(run_cli({"infer", "--checkpoint", (root / "none.ckpt").string(), "--image", "a", "--mask", "b", "--out",
                 "c"}) == kExitUsage);
  // Dataset directory without images: a runtime failure.
  CHECK(run_cli({"train", "--data-root", (root / "nothing").string(), "--output-dir", (root / "o").string()}) ==
        kExitFailure);
  std::ofstream(root / "junk.ckpt") << "junk";
  std::ofstream(root / "a.png") << "junk";
  CHECK(run_cli({"infer", "--checkpoint", (root / "junk.ckpt").string(), "--image", (root / "a.png").string(),
                 "--mask", (root / "a.png").string(), "--out", (root / "o.png").string()}) == kExitFailure);
  fs::remove_all(root);
}

TEST_CASE("train twice gives identical logs; manifest snapshot reproduces the run") {
  const auto root = testing::temp_dir("clitrain");
  testing::write_synthetic_split(root / "data", "train", 4, 40, 40, 6);
  write_tiny_config(root / "tiny.ini", root / "data", root / "runs");
  REQUIRE(run_cli({"train", "--config", (root / "tiny.ini").string()}) == kExitOk);
  REQUIRE(run_cli({"train", "--config", (root / "tiny.ini").string()}) == kExitOk);
  auto runs = subdirs(root / "runs");
  REQUIRE(runs.size() == 2);
  const std::string log = read_file(runs[0] / "training_log.csv");
  CHECK(log == read_file(runs[1] / "training_log.csv"));
  CHECK(std::count(log.begin(), log.end(), '\n') == 4);

  REQUIRE(run_cli({"train", "--config", (runs[0] / "run_manifest.json").string()}) == kExitOk);
  runs = subdirs(root / "runs");
  REQUIRE(runs.size() == 3);
  for (const auto& r : runs) CHECK(read_file(r / "training_log.csv") == log);

  // The run can then be used for inference.
  const fs::path out = root / "removed.png";
  CHECK(run_cli({"infer", "--checkpoint", (runs[0] / "final.ckpt").string(), "--image",
                 (root / "data" / "train_A" / "000.png").string(), "--mask",
                 (root / "data" / "train_B" / "000.png").string(), "--out", out.string(), "--size", "32"}) == kExitOk);
  CHECK(read_rgb(out).height == 32);
  fs::remove_all(root);
}

TEST_CASE("train reads the dataset root from the environment") {
  const auto root = testing::temp_dir("clienv");
  testing::write_synthetic_split(root / "data", "train", 2, 40, 40, 8);
  write_tiny_config(root / "tiny.ini", "", root / "runs");
  ::setenv(kDataRootEnv, (root / "data").string().c_str(), 1);
  CHECK(run_cli({"train", "--config", (root / "tiny.ini").string()}) == kExitOk);
  ::unsetenv(kDataRootEnv);
  CHECK(run_cli({"train", "--config", (root / "tiny.ini").string()}) == kExitUsage);
  fs::remove_all(root);
}

TEST_CASE("ablate over the detach rows writes four runs and a merged table") {
  const auto root = testing::temp_dir("cliablate");
  testing::write_synthetic_split(root / "data", "train", 3, 40, 40, 7);
  testing::write_synthetic_split(root / "data", "test", 2, 40, 40, 70);
  write_tiny_config(root / "tiny.ini", root / "data", root / "runs");
  REQUIRE(run_cli({"ablate", "--config", (root / "tiny.ini").string(), "--matrix", "detach"}) == kExitOk);
  const auto runs = subdirs(root / "runs");
  REQUIRE(runs.size() == 1);
  CHECK(subdirs(runs[0]).size() == 4);
  const std::string csv = read_file(runs[0] / "ablation.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  for (const char* name : {"detach_Gc_Ic", "detach_Gx_Ic", "detach_Gc_Ix", "detach_Gx_Ix"}) {
    CHECK(csv.find(name) != std::string::npos);
  }
  CHECK(run_cli({"ablate", "--config", (root / "tiny.ini").string(), "--matrix", "colour"}) == kExitUsage);
  fs::remove_all(root);
}

TEST_CASE("ablation grids") {
  const TrainConfig base;
  CHECK(ablation_variants("detach", base).size() == 4);
  const auto tau = ablation_variants("tau", base);
  REQUIRE(tau.size() == 5);
  CHECK(tau[2].config.tau == 15);
  const auto loss = ablation_variants("loss", base);
  REQUIRE(loss.size() == 6);
  CHECK(loss[0].config.weights.gan == 0.0);
  CHECK(loss[0].config.weights.iden == 5.0);
  CHECK(ablation_variants("detach,tau", base).size() == 9);
}
