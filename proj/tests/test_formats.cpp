#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "skb/dataset.hpp"
#include "skb/plot.hpp"
#include "skb/tasks.hpp"
#include "skb/training.hpp"

using namespace skb;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("skb_fmt_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

size_t count_occurrences(const std::string& text, const std::string& needle) {
  size_t count = 0, pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

}  // namespace

TEST_CASE("dataset: write -> read -> write is byte-identical") {
  const fs::path dir = temp_dir("roundtrip");
  const Dataset dataset =
      make_dataset(TaskFamily::DivergentPath, {0.0, 0.5, 1.0}, {true, false, true}, 32);
  const fs::path p1 = dir / "a.skbd";
  write_dataset(dataset, p1);
  const Dataset loaded = read_dataset(p1);
  const fs::path p2 = dir / "b.skbd";
  write_dataset(loaded, p2);
  CHECK(slurp(p1) == slurp(p2));

  // Values round-trip bit-exactly.
  REQUIRE(loaded.pairs.size() == dataset.pairs.size());
  for (size_t p = 0; p < dataset.pairs.size(); ++p) {
    CHECK(loaded.pairs[p].task_id == dataset.pairs[p].task_id);
    CHECK(loaded.pairs[p].task_parameter == dataset.pairs[p].task_parameter);
    CHECK(loaded.pairs[p].is_train == dataset.pairs[p].is_train);
    for (size_t r = 0; r < dataset.pairs[p].robots.size(); ++r)
      CHECK((loaded.pairs[p].robots[r].states - dataset.pairs[p].robots[r].states)
                .cwiseAbs()
                .maxCoeff() == 0.0);
  }
  CHECK(loaded.arm.link_lengths == dataset.arm.link_lengths);
  fs::remove_all(dir);
}

TEST_CASE("dataset: regeneration with equal arguments is byte-identical") {
  const fs::path dir = temp_dir("regen");
  const std::vector<double> params{0.25, 0.45, 0.65, 0.85};
  const std::vector<bool> split{true, true, false, true};
  write_dataset(make_dataset(TaskFamily::SamePath, params, split, 48), dir / "a.skbd");
  write_dataset(make_dataset(TaskFamily::SamePath, params, split, 48), dir / "b.skbd");
  CHECK(slurp(dir / "a.skbd") == slurp(dir / "b.skbd"));
  fs::remove_all(dir);
}

TEST_CASE("dataset: wrong magic and truncation rejected") {
  const fs::path dir = temp_dir("bad");
  {
    std::ofstream out(dir / "bad.skbd", std::ios::binary);
    out << "WRONG" << std::string(32, '\0');
  }
  CHECK_THROWS_WITH_AS(read_dataset(dir / "bad.skbd"), doctest::Contains("magic"),
                       std::runtime_error);

  const Dataset dataset = make_dataset(TaskFamily::SamePath, {0.4}, {true}, 16);
  write_dataset(dataset, dir / "good.skbd");
  std::string bytes = slurp(dir / "good.skbd");
  bytes.resize(bytes.size() - 100);
  {
    std::ofstream out(dir / "cut.skbd", std::ios::binary);
    out << bytes;
  }
  CHECK_THROWS_WITH_AS(read_dataset(dir / "cut.skbd"), doctest::Contains("truncated"),
                       std::runtime_error);

  bytes = slurp(dir / "good.skbd") + "xx";
  {
    std::ofstream out(dir / "extra.skbd", std::ios::binary);
    out << bytes;
  }
  CHECK_THROWS_WITH_AS(read_dataset(dir / "extra.skbd"), doctest::Contains("trailing"),
                       std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("trajectory csv: header plus one row per sample") {
  const fs::path dir = temp_dir("csv");
  const Dataset dataset = make_dataset(TaskFamily::SamePath, {0.4}, {true}, 16);
  write_trajectory_csv(dir / "traj.csv", dataset.pairs[0].robots[0]);
  const std::string text = slurp(dir / "traj.csv");
  CHECK(text.rfind("t,", 0) == 0);
  CHECK(count_occurrences(text, "\n") == 17);  // header + 16 samples
  fs::remove_all(dir);
}

TEST_CASE("loss log: read parses what write emits and rejects junk") {
  const fs::path dir = temp_dir("losslog");
  const std::vector<std::pair<long, double>> curve{{1, 3.25}, {2, -1.5e-3}, {3, 100.0}};
  write_loss_log(dir / "loss.txt", curve);
  const auto loaded = read_loss_log(dir / "loss.txt");
  REQUIRE(loaded.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(loaded[i].first == curve[i].first);
    CHECK(loaded[i].second == curve[i].second);
  }
  {
    std::ofstream out(dir / "junk.txt");
    out << "not,a,number\n";
  }
  CHECK_THROWS_AS(read_loss_log(dir / "junk.txt"), std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("trajectory svg: one dashed and one solid polyline per channel") {
  const fs::path dir = temp_dir("svg");
  const Dataset dataset = make_dataset(TaskFamily::SamePath, {0.4}, {true}, 24);
  const Trajectory& mobile = dataset.pairs[0].robots[0];
  Eigen::MatrixXd generated = mobile.states;
  generated.array() += 0.01;
  write_trajectory_svg(dir / "fig.svg", mobile.times, generated, mobile.states,
                       dataset.robots[0].channel_names);
  const std::string svg = slurp(dir / "fig.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(count_occurrences(svg, "<polyline") == 6);          // 3 channels x 2 series
  CHECK(count_occurrences(svg, "stroke-dasharray") == 3);   // one dashed per channel
  CHECK(svg.find("</svg>") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("loss svg: single solid curve") {
  const fs::path dir = temp_dir("losssvg");
  write_loss_curve_svg(dir / "loss.svg", {{1, 5.0}, {2, 4.0}, {3, 3.5}});
  const std::string svg = slurp(dir / "loss.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(count_occurrences(svg, "<polyline") == 1);
  CHECK(count_occurrences(svg, "stroke-dasharray") == 0);
  fs::remove_all(dir);
}
