#include <gtest/gtest.h>

#include "jolimas/cli.hpp"
#include "support.hpp"

using namespace jt;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = 0;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "jolimas");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  testing::internal::CaptureStdout();
  testing::internal::CaptureStderr();
  CliRun r;
  r.code = dispatch(int(argv.size()), argv.data());
  r.err = testing::internal::GetCapturedStderr();
  testing::internal::GetCapturedStdout();
  return r;
}

std::string write_tiny_exp_config(const TempDir& dir) {
  const fs::path p = dir.path() / "exp.json";
  write_text_file(p, R"({"sequence": {"steps": 2, "views_per_step": 4, "kappa_max": 0.2}, "overlay_stride": 0})");
  return p.string();
}

}  // namespace

TEST(Cli, NoSubcommandIsUsageError) { EXPECT_EQ(run({}).code, 2); }

TEST(Cli, UnknownSubcommandIsUsageError) { EXPECT_EQ(run({"explode"}).code, 2); }

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run({"--help"}).code, 0); }

TEST(Cli, MissingConfigNamesThePath) {
  TempDir dir("cli_missing");
  const CliRun r = run({"exp2", "--config", "/nonexistent/exp.json", "--out", dir.path().string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/nonexistent/exp.json"), std::string::npos) << r.err;
}

TEST(Cli, UnknownConfigFieldIsConfigError) {
  TempDir dir("cli_badkey");
  write_text_file(dir.path() / "bad.json", R"({"sequence": {"stepz": 3}})");
  const CliRun r = run({"exp1", "--config", (dir.path() / "bad.json").string(), "--out", dir.path().string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("stepz"), std::string::npos) << r.err;
}

TEST(Cli, OutOfRangeOverrideIsConfigError) {
  TempDir dir("cli_range");
  EXPECT_EQ(run({"exp2", "--config", write_tiny_exp_config(dir), "--out", dir.path().string(), "--directions", "3"}).code,
            2);
  EXPECT_EQ(run({"exp2", "--out", dir.path().string(), "--step-fraction", "1.5"}).code, 2);
}

TEST(Cli, Exp2WritesIdenticalCsvTwice) {
  TempDir dir("cli_exp2");
  const std::string cfg = write_tiny_exp_config(dir);
  const fs::path a = dir.path() / "a", b = dir.path() / "b";
  ASSERT_EQ(run({"exp2", "--config", cfg, "--out", a.string()}).code, 0);
  ASSERT_EQ(run({"exp2", "--config", cfg, "--out", b.string()}).code, 0);
  const std::string csv = slurp(a / "exp2.csv");
  EXPECT_FALSE(csv.empty());
  EXPECT_EQ(csv, slurp(b / "exp2.csv"));
  const Json report = read_json_file(a / "report.json");
  EXPECT_EQ(report["config"]["run"]["command"], "exp2");
}

TEST(Cli, SeedOverrideChangesCameras) {
  TempDir dir("cli_seed");
  const std::string cfg = write_tiny_exp_config(dir);
  const fs::path a = dir.path() / "a", b = dir.path() / "b";
  ASSERT_EQ(run({"exp2", "--config", cfg, "--out", a.string()}).code, 0);
  ASSERT_EQ(run({"exp2", "--config", cfg, "--out", b.string(), "--seed", "99"}).code, 0);
  EXPECT_NE(slurp(a / "exp2.csv"), slurp(b / "exp2.csv"));
}

TEST(Cli, ScenePipelineEndToEnd) {
  TempDir dir("cli_pipeline");
  Scene scene = plane_scene();
  scene.views = arc_cameras(scene.light, 5);
  const fs::path scene_path = dir.path() / "scene.json";
  write_text_file(scene_path, scene_to_json(scene).dump(2));
  const std::string s = scene_path.string();
  const fs::path imgs = dir.path() / "images", rec = dir.path() / "rec", pred = dir.path() / "pred",
                 eval = dir.path() / "eval", det = dir.path() / "det";

  ASSERT_EQ(run({"render", "--scene", s, "--out", imgs.string()}).code, 0);
  EXPECT_TRUE(fs::exists(imgs / (scene.views[0].id + ".pgm")));

  ASSERT_EQ(run({"detect", "--scene", s, "--images", imgs.string(), "--out", det.string()}).code, 0);
  EXPECT_EQ(read_json_file(det / "detections.json")["observations"].size(), 5u);

  const std::string train = scene.views[0].id + "," + scene.views[1].id + "," + scene.views[3].id + "," +
                            scene.views[4].id;
  ASSERT_EQ(run({"reconstruct", "--scene", s, "--images", imgs.string(), "--views", train, "--out", rec.string()}).code,
            0);
  const fs::path model = rec / "model.json";
  EXPECT_TRUE(fs::exists(model));

  ASSERT_EQ(run({"predict", "--scene", s, "--model", model.string(), "--views", scene.views[2].id, "--out",
                 pred.string()})
                .code,
            0);
  EXPECT_EQ(read_json_file(pred / "predictions.json")["predictions"].size(), 1u);

  ASSERT_EQ(run({"evaluate", "--scene", s, "--model", model.string(), "--images", imgs.string(), "--views",
                 scene.views[2].id, "--out", eval.string()})
                .code,
            0);
  const Json report = read_json_file(eval / "report.json");
  EXPECT_EQ(report["summary"]["canonical"]["evaluated"].get<int>(), 1);
  EXPECT_LT(report["summary"]["canonical"]["mean_percent"].get<double>(), 1.0);
}

TEST(Cli, UnknownViewIsConfigError) {
  TempDir dir("cli_view");
  Scene scene = plane_scene();
  scene.views = arc_cameras(scene.light, 3);
  write_text_file(dir.path() / "scene.json", scene_to_json(scene).dump());
  const CliRun r = run({"render", "--scene", (dir.path() / "scene.json").string(), "--views", "nope", "--out",
                     dir.path().string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("nope"), std::string::npos);
}

TEST(Cli, MissingModelIsConfigError) {
  TempDir dir("cli_model");
  Scene scene = plane_scene();
  scene.views = arc_cameras(scene.light, 3);
  write_text_file(dir.path() / "scene.json", scene_to_json(scene).dump());
  EXPECT_EQ(run({"predict", "--scene", (dir.path() / "scene.json").string(), "--model", "/nonexistent/m.json",
                 "--out", dir.path().string()})
                .code,
            2);
}

TEST(Cli, DetectWithoutSpecularityIsPipelineError) {
  TempDir dir("cli_dark");
  Scene scene = plane_scene();
  scene.views = arc_cameras(scene.light, 3);
  write_text_file(dir.path() / "scene.json", scene_to_json(scene).dump());
  fs::create_directories(dir.path() / "imgs");
  for (const auto& v : scene.views) write_pgm16(Image(v.width, v.height), dir.path() / "imgs" / (v.id + ".pgm"));
  EXPECT_EQ(run({"detect", "--scene", (dir.path() / "scene.json").string(), "--images",
                 (dir.path() / "imgs").string(), "--out", dir.path().string()})
                .code,
            1);
}
