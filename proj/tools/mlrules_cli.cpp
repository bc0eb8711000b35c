// mlrules: generate candidate pools, train and apply rule theories, and run
// the cross-validated grid and tuning protocols.
//
// Exit codes: 0 ok, 2 unreadable or malformed input, 3 invalid configuration
// or incompatible artifacts, 4 internal error.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mlrules/dataset.hpp"
#include "mlrules/error.hpp"
#include "mlrules/experiment.hpp"
#include "mlrules/rank.hpp"
#include "mlrules/rule.hpp"
#include "mlrules/theory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mlrules;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;
constexpr int kExitInternal = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << content;
}

/// Relative paths that do not exist are looked up under $MLRULES_DATA_DIR.
std::string resolve_data_path(const std::string& path) {
  if (path.empty() || fs::exists(path) || fs::path(path).is_absolute()) return path;
  if (const char* dir = std::getenv("MLRULES_DATA_DIR")) {
    const auto candidate = fs::path(dir) / path;
    if (fs::exists(candidate)) return candidate.string();
  }
  return path;
}

struct DataOptions {
  std::string data;
  std::string labels_xml;
  bool no_invert = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--data", data, "ARFF file (relative paths also searched in $MLRULES_DATA_DIR)")->required();
    cmd->add_option("--labels-xml", labels_xml, "Label header XML (default: data path with .xml extension)");
    cmd->add_flag("--no-invert", no_invert, "Skip inverting labels whose minority class is 0");
  }

  std::string name() const { return fs::path(data).stem().string(); }

  MultiLabelDataset load() const {
    const auto arff = resolve_data_path(data);
    const auto xml = resolve_data_path(labels_xml.empty() ? fs::path(data).replace_extension(".xml").string()
                                                          : labels_xml);
    auto ds = impute_missing(load_dataset(arff, xml));
    return no_invert ? ds : invert_frequent_labels(std::move(ds));
  }
};

struct GenerationOptions {
  std::size_t gamma = 10000;
  std::uint64_t seed = 1;
  std::size_t max_sweeps = 1000;
  std::size_t trees = 10;
  double bag = 1.0;

  void add(CLI::App* cmd) {
    cmd->add_option("--gamma", gamma, "Minimum number of candidate rules")->capture_default_str();
    cmd->add_option("--seed", seed, "Root seed for every random stream")->capture_default_str();
    cmd->add_option("--max-sweeps", max_sweeps, "Upper bound on generation sweeps")->capture_default_str();
    cmd->add_option("--trees", trees, "Trees per forest")->capture_default_str();
    cmd->add_option("--bag-fraction", bag, "Bag size as a fraction of the training rows")->capture_default_str();
  }

  GenerationConfig config(std::size_t jobs) const {
    GenerationConfig g;
    g.gamma = gamma;
    g.seed = seed;
    g.max_sweeps = max_sweeps;
    g.forest.tree_count = trees;
    g.forest.bag_fraction = bag;
    g.jobs = jobs;
    return g;
  }
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json manifest(const std::string& command, const std::vector<std::string>& argv) {
  return json{{"format_version", 1},
              {"kind", "mlrules.manifest"},
              {"command", command},
              {"argv", argv},
              {"version", "0.1.0"},
              {"started_at", utc_now()}};
}

json grid_json(const SweepGrid& grid) { return {{"m_values", grid.m_values}, {"retentions", grid.retentions}}; }

json folds_json(const std::vector<FoldInfo>& folds) {
  json out = json::array();
  for (const auto& f : folds) {
    out.push_back({{"fold", f.fold},
                   {"train_size", f.train_size},
                   {"test_size", f.test_size},
                   {"pool_seed", f.pool_seed},
                   {"pool_hash", f.pool_hash},
                   {"pool_size", f.pool_size},
                   {"sweeps", f.sweeps},
                   {"warnings", f.warnings},
                   {"generation_seconds", f.generation_seconds},
                   {"evaluation_seconds", f.evaluation_seconds}});
  }
  return out;
}

SweepGrid grid_from(const std::string& m_text, const std::string& r_text) {
  SweepGrid grid = SweepGrid::standard();
  if (auto m = parse_number_list(m_text); !m.empty()) grid.m_values = std::move(m);
  if (auto r = parse_number_list(r_text); !r.empty()) grid.retentions = std::move(r);
  grid.validate();
  return grid;
}

bool is_json_path(const std::string& path) { return fs::path(path).extension() == ".json"; }

RulePool load_pool(const std::string& path, const MultiLabelDataset& ds) {
  const auto text = read_file(path);
  return is_json_path(path) ? pool_from_json(text) : pool_from_text(text, ds);
}

void warn_all(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mlrules: multi-label rule learning from randomized tree ensembles"};
  app.require_subcommand(1);
  const std::vector<std::string> args(argv, argv + argc);
  std::size_t jobs = 1;
  app.add_option("--jobs,-j", jobs, "Worker threads")->capture_default_str();

  // generate
  DataOptions gen_data;
  GenerationOptions gen_opts;
  std::string out_pool;
  auto* generate = app.add_subcommand("generate", "Generate a candidate rule pool");
  gen_data.add(generate);
  gen_opts.add(generate);
  generate->add_option("--out-pool", out_pool, "Pool file (.json for JSON, anything else for the text listing)")
      ->required();

  // train
  DataOptions train_data;
  std::string pool_path, heuristic = "m:16", out_model, listing_path, scope = "pooled";
  double retention = 1.0;
  auto* train = app.add_subcommand("train", "Select, score and threshold rules into a model");
  train_data.add(train);
  train->add_option("--pool", pool_path, "Pool produced by generate")->required();
  train->add_option("--heuristic", heuristic, std::string("Heuristic: ") + std::string(kHeuristicGrammar))
      ->capture_default_str();
  train->add_option("--retention", retention, "Fraction of selected rules kept by the threshold")
      ->capture_default_str();
  train->add_option("--scope", scope, "Threshold scope: pooled | per_label")->capture_default_str();
  train->add_option("--out-model", out_model, "Model JSON")->required();
  train->add_option("--listing", listing_path, "Also write a human-readable rule listing");

  // predict
  DataOptions predict_data;
  std::string predict_model, predict_out;
  bool working_polarity = false;
  auto* predict_cmd = app.add_subcommand("predict", "Write predicted label vectors as CSV");
  predict_data.add(predict_cmd);
  predict_cmd->add_option("--model", predict_model, "Model JSON")->required();
  predict_cmd->add_option("--out", predict_out, "Output CSV (default: stdout)");
  predict_cmd->add_flag("--working-polarity", working_polarity, "Keep inverted labels inverted");

  // evaluate
  DataOptions eval_data;
  std::string eval_model, eval_out;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Micro measures, Hamming and subset accuracy of a model");
  eval_data.add(evaluate_cmd);
  evaluate_cmd->add_option("--model", eval_model, "Model JSON")->required();
  evaluate_cmd->add_option("--out", eval_out, "Metrics CSV (default: stdout)");

  // sweep
  DataOptions sweep_data;
  GenerationOptions sweep_gen;
  std::string m_values, retentions, sweep_out, sweep_manifest;
  std::size_t folds = 10;
  auto* sweep = app.add_subcommand("sweep", "Cross-validated (m, retention) grid over shared pools");
  sweep_data.add(sweep);
  sweep_gen.add(sweep);
  sweep->add_option("--folds", folds, "Cross-validation folds")->capture_default_str();
  sweep->add_option("--m-values", m_values, "Comma-separated m values (default 0,2,4,...,2^19)");
  sweep->add_option("--retentions", retentions, "Comma-separated retentions (default 1,0.95,...,0.05)");
  sweep->add_option("--out", sweep_out, "Metrics CSV")->required();
  sweep->add_option("--manifest", sweep_manifest, "Run manifest (default: <out>.manifest.json)");

  // tune
  DataOptions tune_data;
  GenerationOptions tune_gen;
  std::string tune_m, tune_r, tune_out, tune_manifest, target = "f1";
  std::size_t tune_folds = 10, inner_folds = 5;
  auto* tune = app.add_subcommand("tune", "Nested cross-validation over the grid");
  tune_data.add(tune);
  tune_gen.add(tune);
  tune->add_option("--target", target, "f1 | hamming | subset")->capture_default_str();
  tune->add_option("--folds", tune_folds, "Outer folds")->capture_default_str();
  tune->add_option("--inner-folds", inner_folds, "Inner folds")->capture_default_str();
  tune->add_option("--m-values", tune_m, "Comma-separated m values");
  tune->add_option("--retentions", tune_r, "Comma-separated retentions");
  tune->add_option("--out", tune_out, "Tuning CSV")->required();
  tune->add_option("--manifest", tune_manifest, "Run manifest (default: <out>.manifest.json)");

  // report
  std::vector<std::string> metric_files;
  std::string ranks_in, report_dir, measures_text = "precision,recall,f1,hamming,subset,rules";
  auto* report = app.add_subcommand("report", "Rank matrices and SVG heatmaps from sweep CSVs");
  report->add_option("--metrics", metric_files, "Sweep CSVs, one or more datasets");
  report->add_option("--ranks", ranks_in, "Render an existing rank CSV instead");
  report->add_option("--measures", measures_text, "Comma-separated measures")->capture_default_str();
  report->add_option("--out-dir", report_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    const auto elapsed = [&] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    if (*generate) {
      const auto ds = gen_data.load();
      const auto pool = generate_candidates(ds, gen_opts.config(jobs));
      warn_all(pool.warnings);
      write_file(out_pool, is_json_path(out_pool) ? pool_to_json(pool, ds) : pool_to_text(pool, ds));
      auto m = manifest("generate", args);
      m["dataset"] = {{"name", gen_data.name()}, {"hash", pool.dataset_hash}, {"instances", ds.num_instances()}};
      m["seed"] = gen_opts.seed;
      m["gamma"] = gen_opts.gamma;
      m["pool"] = {{"path", out_pool}, {"size", pool.size()}, {"sweeps", pool.sweeps}, {"hash", pool.hash()}};
      m["warnings"] = pool.warnings;
      m["wall_seconds"] = elapsed();
      write_file(out_pool + ".manifest.json", m.dump(1) + "\n");
      std::cout << pool.size() << " rules in " << pool.sweeps << " sweeps\n";
    } else if (*train) {
      const auto ds = train_data.load();
      const auto pool = load_pool(pool_path, ds);
      TrainConfig cfg;
      cfg.spec = HeuristicSpec::parse(heuristic);
      cfg.retention = retention;
      if (scope == "pooled") cfg.scope = ThresholdScope::pooled;
      else if (scope == "per_label") cfg.scope = ThresholdScope::per_label;
      else throw ConfigError("unknown threshold scope '" + scope + "' (expected pooled | per_label)");
      cfg.jobs = jobs;
      const auto theory = build_theory(pool, ds, cfg);
      warn_all(theory.warnings);
      write_file(out_model, theory_to_json(theory));
      if (!listing_path.empty()) write_file(listing_path, theory_to_listing(theory));
      const auto s = stats(theory);
      std::cout << "rules " << s.rules << ", mean conditions " << s.mean_conditions << '\n';
    } else if (*predict_cmd) {
      const auto ds = predict_data.load();
      const auto theory = theory_from_json(read_file(predict_model));
      check_compatible(theory, ds);
      auto predicted = predict_batch(theory, ds.instances);
      if (!working_polarity) predicted = restore_polarity(std::move(predicted), theory.inverted);
      std::ostringstream os;
      for (std::size_t l = 0; l < theory.label_names.size(); ++l) os << (l ? "," : "") << theory.label_names[l];
      os << '\n';
      for (std::size_t j = 0; j < predicted.rows(); ++j) {
        for (std::size_t l = 0; l < predicted.cols(); ++l) os << (l ? "," : "") << int(predicted.at(j, l));
        os << '\n';
      }
      if (predict_out.empty()) std::cout << os.str();
      else write_file(predict_out, os.str());
    } else if (*evaluate_cmd) {
      const auto ds = eval_data.load();
      const auto theory = theory_from_json(read_file(eval_model));
      check_compatible(theory, ds);
      auto m = compute_metrics(ds.labels, predict_batch(theory, ds.instances), ds.minority);
      const auto s = stats(theory);
      m.rules = static_cast<double>(s.rules);
      m.avg_conditions = s.mean_conditions;
      const double m_value = theory.spec.kind == HeuristicKind::m_estimate ? theory.spec.parameter : 0.0;
      const std::vector<MetricsRow> rows{{eval_data.name(), -1, m_value, theory.retention, m}};
      const auto csv = metrics_to_csv(rows);
      if (eval_out.empty()) std::cout << csv;
      else write_file(eval_out, csv);
    } else if (*sweep) {
      const auto ds = sweep_data.load();
      ExperimentConfig cfg;
      cfg.grid = grid_from(m_values, retentions);
      cfg.generation = sweep_gen.config(jobs);
      cfg.folds = folds;
      cfg.seed = sweep_gen.seed;
      cfg.jobs = jobs;
      cfg.dataset_name = sweep_data.name();
      const auto result = run_sweep(ds, cfg);
      for (const auto& f : result.folds) warn_all(f.warnings);
      write_file(sweep_out, metrics_to_csv(result.all_rows()));
      auto m = manifest("sweep", args);
      m["dataset"] = {{"name", cfg.dataset_name}, {"hash", dataset_hash(ds)}, {"instances", ds.num_instances()}};
      m["seed"] = cfg.seed;
      m["gamma"] = cfg.generation.gamma;
      m["folds"] = cfg.folds;
      m["grid"] = grid_json(cfg.grid);
      m["fold_runs"] = folds_json(result.folds);
      m["wall_seconds"] = elapsed();
      write_file(sweep_manifest.empty() ? sweep_out + ".manifest.json" : sweep_manifest, m.dump(1) + "\n");
    } else if (*tune) {
      const auto ds = tune_data.load();
      TuneConfig cfg;
      cfg.experiment.grid = grid_from(tune_m, tune_r);
      cfg.experiment.generation = tune_gen.config(jobs);
      cfg.experiment.folds = tune_folds;
      cfg.experiment.seed = tune_gen.seed;
      cfg.experiment.jobs = jobs;
      cfg.experiment.dataset_name = tune_data.name();
      cfg.inner_folds = inner_folds;
      cfg.target = parse_target(target);
      const auto result = nested_tune(ds, cfg);
      write_file(tune_out, tune_to_csv(result, cfg.experiment.dataset_name));
      auto m = manifest("tune", args);
      m["dataset"] = {{"name", cfg.experiment.dataset_name}, {"hash", dataset_hash(ds)}};
      m["seed"] = cfg.experiment.seed;
      m["gamma"] = cfg.experiment.generation.gamma;
      m["target"] = target;
      m["grid"] = grid_json(cfg.experiment.grid);
      std::vector<FoldInfo> infos;
      for (const auto& f : result.folds) infos.push_back(f.info);
      m["fold_runs"] = folds_json(infos);
      m["wall_seconds"] = elapsed();
      write_file(tune_manifest.empty() ? tune_out + ".manifest.json" : tune_manifest, m.dump(1) + "\n");
      std::cout << target << " " << measure_value(result.mean, cfg.target) << '\n';
    } else if (*report) {
      std::vector<RankMatrix> matrices;
      if (!ranks_in.empty()) {
        matrices = rank_matrices_from_csv(read_file(ranks_in));
      } else {
        if (metric_files.empty()) throw ConfigError("report needs --metrics or --ranks");
        std::vector<MetricsRow> rows;
        for (const auto& f : metric_files) {
          auto more = metrics_from_csv(read_file(f));
          rows.insert(rows.end(), more.begin(), more.end());
        }
        const auto tables = tables_from_rows(rows);
        std::vector<std::string> measures;
        std::stringstream ss(measures_text);
        for (std::string item; std::getline(ss, item, ',');) {
          metric_by_name(Metrics{}, item);
          measures.push_back(item);
        }
        matrices = rank_matrices(tables, measures);
        write_file((fs::path(report_dir) / "ranks.csv").string(), rank_matrices_to_csv(matrices));
      }
      for (const auto& rm : matrices) {
        write_file((fs::path(report_dir) / (rm.measure + ".svg")).string(), render_heatmap_svg(rm));
      }
    }
    return 0;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}
