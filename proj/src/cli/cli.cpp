// SPDX-License-Identifier: Apache-2.0
#include "glint/cli/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <ostream>

#include "glint/bench/bench.hpp"
#include "glint/cli/run_config.hpp"
#include "glint/data/dataset.hpp"

namespace glint::cli {

namespace {

using nlohmann::json;

struct Context {
  const RunConfig& cfg;
  std::ostream& err;
};

data::InteractionDataset load_data(const RunConfig& cfg) {
  if (cfg.str("data") == "synth") {
    return data::synth_cyclic(cfg.count("synth_items"), cfg.count("synth_users"),
                              cfg.count("synth_length"), cfg.count("synth_seed"));
  }
  data::LogFormat format;
  try {
    format = data::parse_log_format(cfg.str("format"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return data::ingest(cfg.str("data"), format);
}

model::ModelConfig model_config_for(const RunConfig& cfg, const data::InteractionDataset& ds) {
  model::ModelConfig m = cfg.model_config();
  m.vocab_size = ds.vocab_size();
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return m;
}

json split_counts(const data::SplitViews& split) {
  return {{"train", split.train.size()},
          {"valid", split.valid.size()},
          {"test", split.test.size()},
          {"dropped_users", split.dropped_users}};
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

json run_ingest(const Context& ctx) {
  const auto ds = load_data(ctx.cfg);
  const auto split = data::leave_one_out_split(ds);
  if (const auto path = ctx.cfg.str("output"); !path.empty()) {
    open_output(path) << data::split_manifest(ds, split).dump(2) << '\n';
  }
  return {{"stats", data::to_json(ds.stats())}, {"split", split_counts(split)}};
}

json run_synth(const Context& ctx) {
  const std::string path = ctx.cfg.str("output");
  if (path.empty()) throw ConfigError("synth requires --output");
  const auto ds = data::synth_cyclic(ctx.cfg.count("synth_items"), ctx.cfg.count("synth_users"),
                                     ctx.cfg.count("synth_length"), ctx.cfg.count("synth_seed"));
  std::ofstream out = open_output(path);
  out << "user_id\titem_id\ttimestamp\n";
  for (std::size_t u = 0; u < ds.num_users(); ++u) {
    for (std::size_t t = 0; t < ds.sequences[u].size(); ++t) {
      out << ds.user_ids[u] << '\t' << ds.item_ids[ds.sequences[u][t]] << '\t' << t << '\n';
    }
  }
  return {{"stats", data::to_json(ds.stats())}, {"path", path}};
}

json run_train(const Context& ctx) {
  const auto tc = ctx.cfg.train_config();
  const auto ds = load_data(ctx.cfg);
  const auto split = data::leave_one_out_split(ds);
  model::GlintModel m(model_config_for(ctx.cfg, ds), tc.seed);

  std::ofstream log_file;
  if (const auto path = ctx.cfg.str("log"); !path.empty()) log_file = open_output(path);
  const auto log = training::train(m, ds, split, tc, [&](const training::EpochRecord& r) {
    ctx.err << "epoch " << r.epoch << " loss " << r.train_loss << " valid ndcg@" << r.valid.k
            << ' ' << r.valid.ndcg << " (" << r.wall_seconds << " s)\n";
    if (log_file) log_file << training::to_json(r).dump() << '\n';
  });

  const eval::EvalConfig ec{tc.k, tc.exclude_seen, tc.eval_batch_size};
  const auto valid = eval::evaluate(m, ds, split.valid, ec);
  const auto test = eval::evaluate(m, ds, split.test, ec);
  if (const auto dir = ctx.cfg.str("checkpoint"); !dir.empty()) {
    training::save_checkpoint(dir, m, {{"train", training::to_json(tc)}});
  }
  if (const auto path = ctx.cfg.str("ranks"); !path.empty()) {
    std::ofstream out = open_output(path);
    eval::write_rank_dump(out, ds, split.test, test.ranks);
  }
  json curve = json::array();
  for (const auto& e : log.epochs) curve.push_back(e.train_loss);
  json mixing = json::array();
  for (std::size_t l = 0; l < m.config().layers; ++l) {
    const auto [a, g] = m.mixing_weights(l);
    mixing.push_back({a, g});
  }
  return {{"stats", data::to_json(ds.stats())},
          {"split", split_counts(split)},
          {"epochs", log.epochs.size()},
          {"best_epoch", log.best_epoch},
          {"stopped_early", log.stopped_early},
          {"steps", log.steps},
          {"train_loss", std::move(curve)},
          {"mixing", std::move(mixing)},
          {"valid", eval::to_json(valid.report)},
          {"test", eval::to_json(test.report)}};
}

json run_evaluate(const Context& ctx) {
  const std::string dir = ctx.cfg.str("checkpoint");
  if (dir.empty()) throw ConfigError("evaluate requires --checkpoint");
  const auto tc = ctx.cfg.train_config();
  const auto m = training::load_checkpoint(dir);
  const auto ds = load_data(ctx.cfg);
  if (m.config().vocab_size != ds.vocab_size()) {
    throw std::runtime_error("checkpoint scores " + std::to_string(m.config().vocab_size) +
                             " items but the data has " + std::to_string(ds.vocab_size()));
  }
  const auto split = data::leave_one_out_split(ds);
  const eval::EvalConfig ec{tc.k, tc.exclude_seen, tc.eval_batch_size};
  const auto valid = eval::evaluate(m, ds, split.valid, ec);
  const auto test = eval::evaluate(m, ds, split.test, ec);
  if (const auto path = ctx.cfg.str("ranks"); !path.empty()) {
    std::ofstream out = open_output(path);
    eval::write_rank_dump(out, ds, split.test, test.ranks);
  }
  return {{"model", model::to_json(m.config())},
          {"valid", eval::to_json(valid.report)},
          {"test", eval::to_json(test.report)}};
}

json run_bench(const Context& ctx) {
  bench::SweepOptions opts;
  opts.d = ctx.cfg.count("hidden");
  opts.k = ctx.cfg.count("kernel");
  opts.heads = ctx.cfg.count("heads");
  opts.batch = ctx.cfg.count("bench_batch");
  opts.seed = static_cast<std::uint64_t>(ctx.cfg.integer("seed"));
  opts.timing.reps = ctx.cfg.count("reps");
  bench::Component component;
  try {
    component = bench::parse_component(ctx.cfg.str("component"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (opts.timing.reps < 5) throw ConfigError("reps must be at least 5");
  const auto lengths = ctx.cfg.list("lengths");
  const auto records = bench::scaling_sweep(component, lengths, opts);
  if (const auto path = ctx.cfg.str("output"); !path.empty()) {
    std::ofstream out = open_output(path);
    bench::write_timing_csv(out, records);
  }
  json rows = json::array();
  for (const auto& r : records) rows.push_back(bench::to_json(r));
  return {{"records", std::move(rows)}, {"loglog_slope", bench::loglog_slope(records)}};
}

json run_ablate(const Context& ctx) {
  const auto tc = ctx.cfg.train_config();
  const auto ds = load_data(ctx.cfg);
  const auto split = data::leave_one_out_split(ds);
  const auto results = bench::ablation_run(ds, split, model_config_for(ctx.cfg, ds), tc,
                                           [&](const std::string& msg) { ctx.err << msg << '\n'; });
  json rows = json::array();
  for (const auto& r : results) rows.push_back(bench::to_json(r));
  return {{"variants", std::move(rows)}};
}

json run_sweep(const Context& ctx) {
  const auto tc = ctx.cfg.train_config();
  bench::SweepAxis axis;
  try {
    axis = bench::parse_axis(ctx.cfg.str("axis"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const auto ds = load_data(ctx.cfg);
  const auto split = data::leave_one_out_split(ds);
  const auto values = ctx.cfg.list("values");
  std::vector<bench::SweepPoint> points;
  try {
    points = bench::param_sweep(axis, values, ds, split, model_config_for(ctx.cfg, ds), tc,
                                [&](const std::string& msg) { ctx.err << msg << '\n'; });
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (const auto path = ctx.cfg.str("output"); !path.empty()) {
    std::ofstream out = open_output(path);
    bench::write_sweep_csv(out, points);
  }
  json rows = json::array();
  for (const auto& p : points) rows.push_back(bench::to_json(p));
  return {{"points", std::move(rows)}};
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"GLINT-RU sequential recommender: data, training, evaluation and benchmarks",
               "glint"};
  app.fallthrough();
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key = value settings file");
  std::map<std::string, std::string> flag_storage;
  std::map<std::string, CLI::Option*> flag_options;
  for (const auto& spec : key_schema()) {
    const std::string key(spec.key);
    flag_options[key] = app.add_option("--" + key, flag_storage[key],
                                       std::string(spec.help) + " [" + std::string(spec.fallback) +
                                           "]");
  }
  using Runner = json (*)(const Context&);
  const std::vector<std::tuple<const char*, const char*, Runner>> commands = {
      {"ingest", "read an interaction log and report statistics", run_ingest},
      {"synth", "write a synthetic cyclic interaction log", run_synth},
      {"train", "train, validate and test a model", run_train},
      {"evaluate", "evaluate a checkpoint on the test split", run_evaluate},
      {"bench", "time a component over sequence lengths", run_bench},
      {"ablate", "train and test the five ablation variants", run_ablate},
      {"sweep", "train and test over a grid of k, d or L", run_sweep},
  };
  for (const auto& [name, help, runner] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  const std::string command = chosen->get_name();
  std::map<std::string, std::string> flags;
  for (const auto& [key, opt] : flag_options) {
    if (opt->count() > 0) flags[key] = flag_storage[key];
  }

  RunConfig cfg;
  try {
    const auto file = config_path.empty() ? std::map<std::string, std::string>{}
                                          : parse_config_file(config_path);
    cfg = RunConfig::resolve(file, flags);
  } catch (const ConfigError& e) {
    err << "glint " << command << ": " << e.what() << "\n" << app.help();
    return 2;
  }

  const Context ctx{cfg, err};
  json result;
  try {
    for (const auto& [name, help, runner] : commands) {
      if (command == name) result = runner(ctx);
    }
  } catch (const ConfigError& e) {
    err << "glint " << command << ": " << e.what() << "\nRun glint --help for every setting.\n";
    return 2;
  } catch (const std::exception& e) {
    err << "glint " << command << ": " << e.what() << '\n';
    out << json{{"schema", kOutputSchema}, {"command", command}, {"error", e.what()}}.dump(2)
        << '\n';
    return 1;
  }
  out << json{{"schema", kOutputSchema},
              {"command", command},
              {"config", cfg.to_json()},
              {"result", std::move(result)}}
             .dump(2)
      << '\n';
  return 0;
}

}  // namespace glint::cli
