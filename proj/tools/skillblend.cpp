#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "skb/dataset.hpp"
#include "skb/eval.hpp"
#include "skb/plot.hpp"
#include "skb/tasks.hpp"
#include "skb/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunConfig {
  std::string dataset;
  std::string output_dir = "run_out";
  skb::ModelConfig model;
  skb::TrainConfig train;
};

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  json j;
  in >> j;

  static const std::vector<std::string> known{
      "dataset",       "output_dir",     "latent_width",        "encoder_hidden",
      "decoder_hidden", "activation",    "iterations",          "learning_rate",
      "obs_max",       "seed",           "weight_scheme",       "checkpoint_interval",
      "log_interval",  "grad_accumulation"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::runtime_error("config: unknown key '" + key + "'");
  }

  RunConfig config;
  config.dataset = j.at("dataset").get<std::string>();
  if (j.contains("output_dir")) config.output_dir = j["output_dir"].get<std::string>();
  if (j.contains("latent_width")) config.model.latent_width = j["latent_width"].get<int>();
  if (j.contains("encoder_hidden"))
    config.model.encoder_hidden = j["encoder_hidden"].get<std::vector<int>>();
  if (j.contains("decoder_hidden"))
    config.model.decoder_hidden = j["decoder_hidden"].get<std::vector<int>>();
  if (j.contains("activation"))
    config.model.hidden_activation = skb::activation_from_string(j["activation"].get<std::string>());
  if (j.contains("iterations")) config.train.iterations = j["iterations"].get<long>();
  if (j.contains("learning_rate")) config.train.learning_rate = j["learning_rate"].get<double>();
  if (j.contains("obs_max")) config.train.obs_max = j["obs_max"].get<int>();
  if (j.contains("seed")) config.train.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("weight_scheme"))
    config.train.weight_scheme = skb::weight_scheme_from_string(j["weight_scheme"].get<std::string>());
  if (j.contains("checkpoint_interval"))
    config.train.checkpoint_interval = j["checkpoint_interval"].get<long>();
  if (j.contains("log_interval")) config.train.log_interval = j["log_interval"].get<long>();
  if (j.contains("grad_accumulation"))
    config.train.grad_accumulation = j["grad_accumulation"].get<int>();

  if (!fs::exists(config.dataset))
    throw std::runtime_error("config: dataset path does not exist: " + config.dataset);
  config.train.output_dir = config.output_dir;
  return config;
}

std::string sanitize(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", value);
  std::string s = buf;
  for (char& c : s)
    if (c == '.' || c == '-') c = (c == '.') ? 'p' : 'm';
  return s;
}

void write_transfer_csv(const fs::path& path, const skb::GeneratedTrajectory& gen,
                        const skb::Trajectory& gt, const skb::RobotSpec& spec) {
  std::string out = "t";
  for (const auto& name : spec.channel_names) out += ",gen_" + name;
  for (const auto& name : spec.channel_names) out += ",std_" + name;
  for (const auto& name : spec.channel_names) out += ",gt_" + name;
  out += "\n";
  char cell[48];
  for (Eigen::Index i = 0; i < gen.times.size(); ++i) {
    std::snprintf(cell, sizeof(cell), "%.17g", gen.times[i]);
    out += cell;
    for (Eigen::Index c = 0; c < gen.mean.cols(); ++c) {
      std::snprintf(cell, sizeof(cell), ",%.17g", gen.mean(i, c));
      out += cell;
    }
    for (Eigen::Index c = 0; c < gen.std.cols(); ++c) {
      std::snprintf(cell, sizeof(cell), ",%.17g", gen.std(i, c));
      out += cell;
    }
    for (Eigen::Index c = 0; c < gt.states.cols(); ++c) {
      std::snprintf(cell, sizeof(cell), ",%.17g", gt.states(i, c));
      out += cell;
    }
    out += "\n";
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << out;
}

struct TransferTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

TransferTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  TransferTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path.string());
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) table.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != table.header.size())
      throw std::runtime_error("ragged csv row in " + path.string());
    table.rows.push_back(std::move(row));
  }
  return table;
}

void cmd_gen(const std::string& family_name, int count, int train_count,
             std::vector<double> train_params, std::vector<double> test_params, int T,
             const std::string& out) {
  const skb::TaskFamily family = skb::family_from_string(family_name);
  std::vector<double> params;
  std::vector<bool> flags;
  if (!train_params.empty() || !test_params.empty()) {
    for (double p : train_params) {
      params.push_back(p);
      flags.push_back(true);
    }
    for (double p : test_params) {
      params.push_back(p);
      flags.push_back(false);
    }
  } else {
    params = skb::default_parameters(family, count);
    flags = skb::interleaved_split(count, train_count);
  }
  for (double p : params) skb::validate({family, p, T});

  const skb::Dataset dataset = skb::make_dataset(family, params, flags, T);
  skb::write_dataset(dataset, out);

  int train_n = 0;
  for (bool f : flags) train_n += f ? 1 : 0;
  std::cout << "wrote " << out << ": " << dataset.pairs.size() << " pairs (" << train_n
            << " train / " << (dataset.pairs.size() - train_n) << " test), T=" << dataset.T
            << ", robots:";
  for (const auto& r : dataset.robots) std::cout << " " << r.id << "(" << r.channels() << "ch)";
  std::cout << "\n";
}

void cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed_override,
               const std::string& resume_path) {
  RunConfig config = load_run_config(config_path);
  if (seed_override) config.train.seed = *seed_override;
  const skb::Dataset dataset = skb::read_dataset(config.dataset);

  skb::TrainState state =
      resume_path.empty()
          ? skb::make_train_state(dataset, config.model, {config.train.learning_rate}, config.train.seed)
          : skb::load_checkpoint(resume_path);
  const skb::TrainReport report = skb::train(state, dataset, config.train);
  std::cout << "trained " << state.iteration << " iterations in " << report.wall_seconds
            << " s, final loss "
            << (report.loss_curve.empty() ? 0.0 : report.loss_curve.back().second) << "\n"
            << "checkpoint: " << report.final_checkpoint_path << "\n"
            << "loss log: " << (fs::path(config.output_dir) / "train_loss.txt").string() << "\n";
}

void cmd_transfer(const std::string& checkpoint, const std::string& dataset_path,
                  const std::string& source, const std::string& target, int obs_count,
                  std::vector<int> obs_indices, const std::string& split,
                  const std::string& outdir) {
  const skb::TrainState state = skb::load_checkpoint(checkpoint);
  const skb::Dataset dataset = skb::read_dataset(dataset_path);
  skb::check_model_dataset_compatible(state.model, dataset);

  std::vector<int> pair_indices;
  if (split == "test")
    pair_indices = dataset.test_indices();
  else if (split == "train")
    pair_indices = dataset.train_indices();
  else if (split == "all")
    for (size_t i = 0; i < dataset.pairs.size(); ++i) pair_indices.push_back(static_cast<int>(i));
  else
    throw std::runtime_error("unknown split: " + split);
  if (pair_indices.empty()) throw std::runtime_error("no pairs in split " + split);

  const std::vector<int> indices =
      skb::observation_indices(dataset.T, obs_count, obs_indices.empty() ? nullptr : &obs_indices);
  fs::create_directories(outdir);

  const int tgt = dataset.robot_index(target);
  for (int p : pair_indices) {
    const skb::DemonstrationPair& pair = dataset.pairs[p];
    const skb::Trajectory* src_traj = nullptr;
    const skb::Trajectory* tgt_traj = nullptr;
    for (const auto& t : pair.robots) {
      if (t.robot_id == source) src_traj = &t;
      if (t.robot_id == target) tgt_traj = &t;
    }
    if (!src_traj || !tgt_traj) throw std::runtime_error("pair lacks requested robots");

    skb::ObservationSet obs;
    obs.robot_id = source;
    obs.times.resize(indices.size());
    obs.states.resize(indices.size(), src_traj->states.cols());
    for (size_t i = 0; i < indices.size(); ++i) {
      obs.times[static_cast<Eigen::Index>(i)] = src_traj->times[indices[i]];
      obs.states.row(static_cast<Eigen::Index>(i)) = src_traj->states.row(indices[i]);
    }
    const skb::GeneratedTrajectory gen =
        skb::query_trajectory(state.model, obs, target, tgt_traj->times);
    const fs::path out = fs::path(outdir) / ("transfer_" + source + "_to_" + target + "_" +
                                             sanitize(pair.task_parameter) + ".csv");
    write_transfer_csv(out, gen, *tgt_traj, dataset.robots[tgt]);
    std::cout << "wrote " << out.string() << " (rmse "
              << skb::aggregate_rmse(
                     skb::normalize_states(gen.mean, state.model.stats[tgt]),
                     skb::normalize_states(tgt_traj->states, state.model.stats[tgt]))
              << " normalized)\n";
  }
}

void cmd_eval(const std::string& checkpoint, const std::string& dataset_path, int obs_count,
              std::vector<int> obs_indices, const std::string& split, const std::string& out) {
  const skb::TrainState state = skb::load_checkpoint(checkpoint);
  const skb::Dataset dataset = skb::read_dataset(dataset_path);
  const bool include_train = (split == "all");
  if (split != "all" && split != "test") throw std::runtime_error("unknown split: " + split);

  const std::vector<skb::TransferResult> results = skb::transfer_sweep(
      state.model, dataset, obs_count, obs_indices.empty() ? nullptr : &obs_indices,
      include_train);
  skb::write_results_csv(out, results);

  std::printf("%-10s %-10s %-12s %-12s %-12s\n", "source", "target", "param", "rmse(norm)",
              "pos_err(m)");
  for (const auto& r : results)
    std::printf("%-10s %-10s %-12.4g %-12.4g %-12.4g\n", r.source.c_str(), r.target.c_str(),
                r.task_parameter, r.rmse_aggregate, r.position_error);
  for (const auto& s : skb::summarize(results)) {
    std::printf("summary %s->%s: rmse %.4g +/- %.4g, pos %.4g +/- %.4g", s.source.c_str(),
                s.target.c_str(), s.rmse_mean, s.rmse_std, s.position_error_mean,
                s.position_error_std);
    if (s.directional_error_mean)
      std::printf(", dir %.4g +/- %.4g deg", *s.directional_error_mean, *s.directional_error_std);
    std::printf("\n");
  }
  std::cout << "wrote " << out << "\n";
}

void cmd_plot(const std::string& traj_csv, const std::string& loss_log, const std::string& out) {
  if (!traj_csv.empty() && !loss_log.empty())
    throw std::runtime_error("plot: give either --traj or --loss, not both");
  if (traj_csv.empty() && loss_log.empty())
    throw std::runtime_error("plot: one of --traj or --loss is required");

  if (!loss_log.empty()) {
    skb::write_loss_curve_svg(out, skb::read_loss_log(loss_log));
    std::cout << "wrote " << out << "\n";
    return;
  }

  const TransferTable table = read_csv(traj_csv);
  std::vector<int> gen_cols, gt_cols;
  std::vector<std::string> names;
  for (size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c].rfind("gen_", 0) == 0) {
      gen_cols.push_back(static_cast<int>(c));
      names.push_back(table.header[c].substr(4));
    }
    if (table.header[c].rfind("gt_", 0) == 0) gt_cols.push_back(static_cast<int>(c));
  }
  if (gen_cols.empty() || gen_cols.size() != gt_cols.size())
    throw std::runtime_error("plot: csv lacks matching gen_/gt_ columns");

  const int T = static_cast<int>(table.rows.size());
  Eigen::VectorXd times(T);
  Eigen::MatrixXd gen(T, gen_cols.size()), gt(T, gt_cols.size());
  for (int i = 0; i < T; ++i) {
    times[i] = table.rows[i][0];
    for (size_t c = 0; c < gen_cols.size(); ++c) {
      gen(i, static_cast<Eigen::Index>(c)) = table.rows[i][gen_cols[c]];
      gt(i, static_cast<Eigen::Index>(c)) = table.rows[i][gt_cols[c]];
    }
  }
  skb::write_trajectory_svg(out, times, gen, gt, names);
  std::cout << "wrote " << out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skillblend: cross-robot skill transfer with coupled conditional"
               " movement primitives"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a paired demonstration dataset");
  std::string family, gen_out;
  int gen_count = 0, gen_train = -1, gen_T = 128;
  std::vector<double> train_params, test_params;
  gen->add_option("family", family, "same_path | divergent_path | radial_push")->required();
  gen->add_option("--count", gen_count, "number of task parameters (default per family)");
  gen->add_option("--train", gen_train, "training pairs out of --count (default per family)");
  gen->add_option("--train-params,--train-angles", train_params,
                  "explicit training parameters (comma separated)")
      ->delimiter(',');
  gen->add_option("--test-params,--test-angles", test_params,
                  "explicit test parameters (comma separated)")
      ->delimiter(',');
  gen->add_option("--T", gen_T, "samples per trajectory")->capture_default_str();
  gen->add_option("--out", gen_out, "output dataset file")->required();
  gen->callback([&] {
    if (gen_count == 0 && train_params.empty() && test_params.empty()) {
      if (family == "radial_push") {
        train_params = {-75, -45, -15, 0, 15, 45, 75};
        test_params = {-60, -30, 30, 60};
      } else if (family == "divergent_path") {
        gen_count = 9;
      } else {
        gen_count = 8;
      }
    }
    if (gen_train < 0) gen_train = (family == "divergent_path") ? 7 : 6;
    cmd_gen(family, gen_count, gen_train, train_params, test_params, gen_T, gen_out);
  });

  // train
  auto* train = app.add_subcommand("train", "train the coupled model from a config file");
  std::string train_config, resume;
  std::uint64_t seed = 0;
  bool seed_set = false;
  train->add_option("--config", train_config, "JSON run config")->required();
  train->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
    seed_set = true;
  });
  train->add_option("--resume", resume, "checkpoint to continue from");
  train->callback([&] {
    cmd_train(train_config, seed_set ? std::optional<std::uint64_t>(seed) : std::nullopt, resume);
  });

  // transfer
  auto* transfer = app.add_subcommand("transfer", "generate target-robot trajectories from"
                                                  " source-robot observations");
  std::string ck, ds, source, target, split = "test", outdir = "transfer_out";
  int obs_count = 3;
  std::vector<int> obs_indices;
  transfer->add_option("--checkpoint", ck)->required();
  transfer->add_option("--dataset", ds)->required();
  transfer->add_option("--source", source, "observed robot id")->required();
  transfer->add_option("--target", target, "generated robot id")->required();
  transfer->add_option("--obs-count", obs_count, "observations from the protocol indices")
      ->capture_default_str();
  transfer->add_option("--obs-indices", obs_indices, "explicit observation indices")
      ->delimiter(',');
  transfer->add_option("--split", split, "test | train | all")->capture_default_str();
  transfer->add_option("--outdir", outdir, "output directory")->capture_default_str();
  transfer->callback([&] {
    cmd_transfer(ck, ds, source, target, obs_count, obs_indices, split, outdir);
  });

  // eval
  auto* eval = app.add_subcommand("eval", "run the transfer sweep and write the metrics table");
  std::string eval_ck, eval_ds, eval_split = "test", eval_out = "metrics.csv";
  int eval_obs = 3;
  std::vector<int> eval_indices;
  eval->add_option("--checkpoint", eval_ck)->required();
  eval->add_option("--dataset", eval_ds)->required();
  eval->add_option("--obs-count", eval_obs)->capture_default_str();
  eval->add_option("--obs-indices", eval_indices, "explicit observation indices")->delimiter(',');
  eval->add_option("--split", eval_split, "test | all")->capture_default_str();
  eval->add_option("--out", eval_out, "metrics csv path")->capture_default_str();
  eval->callback([&] { cmd_eval(eval_ck, eval_ds, eval_obs, eval_indices, eval_split, eval_out); });

  // plot
  auto* plot = app.add_subcommand("plot", "render a transfer csv or loss log as SVG");
  std::string plot_traj, plot_loss, plot_out;
  plot->add_option("--traj", plot_traj, "transfer csv (t, gen_*, std_*, gt_*)");
  plot->add_option("--loss", plot_loss, "loss log (iteration,loss lines)");
  plot->add_option("--out", plot_out, "output svg")->required();
  plot->callback([&] { cmd_plot(plot_traj, plot_loss, plot_out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
