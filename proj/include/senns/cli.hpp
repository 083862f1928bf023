#ifndef SENNS_CLI_HPP
#define SENNS_CLI_HPP

// Command-line front end: train, extract, eval, pairs, gradcheck.
//
// Every subcommand accepts `--config FILE` with `key = value` lines whose keys
// are the long option names; options given on the command line win.
// Exit codes: 0 success, 2 usage, 3 data, 4 numeric failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "senns/data.hpp"
#include "senns/error.hpp"
#include "senns/eval.hpp"
#include "senns/gradcheck.hpp"
#include "senns/io_util.hpp"
#include "senns/model_io.hpp"
#include "senns/network.hpp"
#include "senns/objective.hpp"
#include "senns/pairs.hpp"
#include "senns/trainer.hpp"

namespace senns::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

// Where the examples come from: a CSV file, an IDX pair, or a generator.
struct DataSource {
  std::string csv;
  int label_column = -1;
  std::string idx_images;
  std::string idx_labels;
  std::size_t limit = 0;
  std::string synthetic;  // "gaussians" | "moons"
  std::size_t synthetic_n = 100;
  std::size_t synthetic_classes = 2;
  double synthetic_noise = 0.1;
  std::uint64_t data_seed = 1;
  bool standardize = false;
};

struct RunConfig {
  DataSource data;
  std::vector<std::size_t> hidden{4};
  std::size_t output_size = 2;
  std::string hidden_transfer = "tanh";
  std::string output_transfer = "linear";
  Hyperparams hp;
  std::string pair_mode = "full";
  std::size_t k = 3;
  bool exclude_self_pairs = false;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool reproducible = true;
  bool halve_on_increase = false;
  std::string model_out = "senns.model";
  std::string telemetry_out;
  std::string summary_out;
};

inline void add_data_options(CLI::App& app, DataSource& d) {
  app.add_option("--csv", d.csv, "CSV dataset (features plus a label column)");
  app.add_option("--label-column", d.label_column, "zero-based label column, negative counts from the end");
  app.add_option("--idx-images", d.idx_images, "IDX3 image file");
  app.add_option("--idx-labels", d.idx_labels, "IDX1 label file");
  app.add_option("--limit", d.limit, "take only the first N IDX examples (0 = all)");
  app.add_option("--synthetic", d.synthetic, "generated dataset: gaussians | moons")
      ->check(CLI::IsMember({"gaussians", "moons"}));
  app.add_option("--synthetic-n", d.synthetic_n, "number of generated points");
  app.add_option("--synthetic-classes", d.synthetic_classes, "number of Gaussian blobs");
  app.add_option("--synthetic-noise", d.synthetic_noise, "noise standard deviation");
  app.add_option("--data-seed", d.data_seed, "seed for the generator");
  app.add_flag("--standardize", d.standardize, "scale every feature to mean 0, std 1");
}

inline LabeledDataset load_data(const DataSource& d) {
  const int sources = !d.csv.empty() + !d.idx_images.empty() + !d.synthetic.empty();
  if (sources != 1) throw CLI::ValidationError("data", "give exactly one of --csv, --idx-images/--idx-labels, --synthetic");
  LabeledDataset ds;
  if (!d.csv.empty()) {
    ds = load_csv(d.csv, d.label_column);
  } else if (!d.idx_images.empty()) {
    if (d.idx_labels.empty()) throw CLI::ValidationError("--idx-labels", "required with --idx-images");
    ds = load_idx(d.idx_images, d.idx_labels, d.limit);
  } else if (d.synthetic == "moons") {
    ds = make_two_moons(d.synthetic_n, d.synthetic_noise, d.data_seed);
  } else {
    std::vector<Vector> centers;
    for (std::size_t c = 0; c < d.synthetic_classes; ++c) {
      const double th = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(d.synthetic_classes);
      centers.push_back({2.0 * std::cos(th), 2.0 * std::sin(th)});
    }
    const std::size_t per = std::max<std::size_t>(1, d.synthetic_n / std::max<std::size_t>(1, d.synthetic_classes));
    ds = make_gaussians(per, centers, d.synthetic_noise, d.data_seed);
  }
  validate(ds);
  if (d.standardize) fit_standardizer(ds).apply(ds);
  return ds;
}

inline PairList make_pairs(const LabeledDataset& ds, const std::string& mode, std::size_t k, bool exclude_self) {
  if (mode == "full") return build_full(ds, exclude_self);
  return build_heuristic(ds, k);
}

inline std::string summary_text(const RunConfig& cfg, const TrainReport& r, const LabeledDataset& ds,
                                 const PairList& pairs) {
  std::ostringstream s;
  const ObjectiveValue& first = r.history.front();
  const ObjectiveValue& last = r.history.back();
  s << "examples=" << ds.size() << "\nclasses=" << ds.num_classes() << "\npairs=" << pairs.size()
    << "\nm_c=" << pairs.m_c << "\nm_d=" << pairs.m_d << "\nseed=" << cfg.seed
    << "\niterations=" << r.iterations_run << "\nconverged=" << (r.converged ? "true" : "false")
    << "\nalpha=" << detail::csv_number(r.final_alpha) << "\nJ_initial=" << detail::csv_number(first.j_total)
    << "\nJ_final=" << detail::csv_number(last.j_total) << "\n";
  return s.str();
}

inline int cmd_train(const RunConfig& cfg, std::ostream& out) {
  validate(cfg.hp);  // ConfigError -> usage, before any data is touched
  for (std::size_t h : cfg.hidden)
    if (h == 0) throw ConfigError("hidden layer sizes must be positive");
  const LabeledDataset ds = load_data(cfg.data);

  std::vector<std::size_t> sizes{ds.dim()};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(cfg.output_size);
  std::vector<TransferKind> kinds(sizes.size() - 1, parse_transfer(cfg.hidden_transfer));
  kinds.back() = parse_transfer(cfg.output_transfer);

  const Network init = init_random(sizes, kinds, cfg.seed);
  const PairList pairs = make_pairs(ds, cfg.pair_mode, cfg.k, cfg.exclude_self_pairs);
  TrainOptions opts;
  opts.grad.threads = cfg.threads;
  opts.grad.reproducible = cfg.reproducible;
  opts.halve_on_increase = cfg.halve_on_increase;
  const TrainReport report = train(init, ds, pairs, cfg.hp, cfg.seed, opts);

  // Everything is computed before the first file is written.
  const std::string model_text = serialize(report.network);
  const std::string summary = summary_text(cfg, report, ds, pairs);
  write_file_atomic(cfg.model_out, model_text);
  if (!cfg.telemetry_out.empty()) write_file_atomic(cfg.telemetry_out, telemetry_csv(report));
  if (!cfg.summary_out.empty()) write_file_atomic(cfg.summary_out, summary);
  out << summary;
  return kOk;
}

inline int cmd_extract(const std::string& model_path, const DataSource& data, const std::string& out_path,
                       std::ostream& out) {
  const Network net = deserialize(read_file(model_path));
  const LabeledDataset ds = load_data(data);
  export_features(net, ds, out_path);
  out << "wrote " << ds.size() << " feature rows of dimension " << net.output_size() << " to " << out_path << "\n";
  return kOk;
}

inline int cmd_eval(const std::string& features_path, const std::string& test_path, std::size_t k, double epsilon,
                    const std::string& format, std::ostream& out) {
  const LabeledDataset features = load_csv(features_path);
  EvalReport report = evaluate(features, k, epsilon);
  if (!test_path.empty()) {
    LabeledDataset test = load_csv(test_path);
    // Align test label ids with the training file's class names.
    std::vector<ClassId> truth;
    for (ClassId c : test.labels) {
      const std::string name = label_name(test, c);
      const auto it = std::find(features.class_names.begin(), features.class_names.end(), name);
      truth.push_back(it == features.class_names.end() ? features.class_names.size()
                                                       : static_cast<ClassId>(it - features.class_names.begin()));
    }
    report.knn_accuracy = accuracy(knn_classify(features.inputs, features.labels, test.inputs, k), truth);
  }
  out << (format == "csv" ? to_csv(report) : to_key_value(report));
  return kOk;
}

inline int cmd_pairs(const DataSource& data, const std::string& mode, std::size_t k, bool exclude_self,
                     const std::string& out_path, std::ostream& out) {
  const LabeledDataset ds = load_data(data);
  const std::string csv = pairs_to_csv(make_pairs(ds, mode, k, exclude_self));
  if (out_path.empty())
    out << csv;
  else
    write_file_atomic(out_path, csv);
  return kOk;
}

inline int cmd_gradcheck(const GradcheckSpec& spec, std::uint64_t seed, double threshold, bool sabotage,
                         std::ostream& out, std::ostream& err) {
  validate(spec.hp);
  const GradcheckInstance inst = make_gradcheck_instance(spec, seed);
  const GradcheckResult r = run_gradcheck(inst, spec.step, threshold, sabotage);
  out << "max_rel_error=" << detail::csv_number(r.worst.max_rel_error) << "\n";
  if (!r.passed) {
    err << "gradient check failed at " << r.worst.coordinate << ": analytic " << r.worst.analytic << " vs numeric "
        << r.worst.numeric << " (threshold " << threshold << ")\n";
    return kNumeric;
  }
  return kOk;
}

 // Appends `--key=value` for every entry of the `--config` file whose key was
 // not given on the command line. Keys may be bare or sit under a section
 // named after the subcommand.
inline std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string file;
  std::vector<std::string> given;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0 || a.size() == 2) continue;
    const std::string name = a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2);
    given.push_back(name);
    if (name == "config") {
      if (a.find('=') != std::string::npos)
        file = a.substr(a.find('=') + 1);
      else if (i + 1 < args.size())
        file = args[i + 1];
    }
  }
  if (file.empty() || args.empty()) return args;
  if (!std::filesystem::exists(file)) throw CLI::FileError::Missing(file);

  std::vector<std::string> out = args;
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(file)) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents.front() == args.front()))
      throw CLI::ConfigError::Extras(item.fullname());
    if (std::find(given.begin(), given.end(), item.name) != given.end()) continue;
    std::string value;
    for (const std::string& v : item.inputs) value += (value.empty() ? "" : ",") + v;
    out.push_back("--" + item.name + "=" + value);
  }
  return out;
}

// Parses `args` (without the program name) and runs the chosen subcommand.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"senns: sparse contrastive feature extraction with a multilayer perceptron"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;  // consumed by expand_config before parsing
  double lambdas[4] = {cfg.hp.lambda1, cfg.hp.lambda2, cfg.hp.lambda3, cfg.hp.lambda4};
  auto* train_cmd = app.add_subcommand("train", "train a network and write the model file");
  train_cmd->add_option("--config", config_path, "key = value configuration file");
  add_data_options(*train_cmd, cfg.data);
  train_cmd->add_option("--hidden", cfg.hidden, "hidden layer sizes, comma separated")->delimiter(',');
  train_cmd->add_option("--output-size", cfg.output_size, "number of extracted features");
  train_cmd->add_option("--hidden-transfer", cfg.hidden_transfer)->check(CLI::IsMember({"sigmoid", "tanh", "linear"}));
  train_cmd->add_option("--output-transfer", cfg.output_transfer)->check(CLI::IsMember({"sigmoid", "tanh", "linear"}));
  for (int i = 0; i < 4; ++i)
    train_cmd->add_option("--lambda" + std::to_string(i + 1), lambdas[i]);
  train_cmd->add_option("--alpha", cfg.hp.alpha, "learning rate");
  train_cmd->add_option("--tol", cfg.hp.tol, "relative objective change that counts as converged");
  train_cmd->add_option("--max-iters", cfg.hp.max_iters);
  train_cmd->add_option("--pairs", cfg.pair_mode)->check(CLI::IsMember({"full", "heuristic"}));
  train_cmd->add_option("--k", cfg.k, "farthest same-class neighbours per example (heuristic pairs)");
  train_cmd->add_flag("--exclude-self-pairs", cfg.exclude_self_pairs);
  train_cmd->add_option("--seed", cfg.seed);
  train_cmd->add_option("--threads", cfg.threads);
  train_cmd->add_option("--reproducible", cfg.reproducible, "fixed reduction order (default true)");
  train_cmd->add_flag("--halve-on-increase", cfg.halve_on_increase);
  train_cmd->add_option("--model", cfg.model_out, "model output path");
  train_cmd->add_option("--telemetry", cfg.telemetry_out, "per-iteration CSV output path");
  train_cmd->add_option("--summary", cfg.summary_out, "run summary output path");

  std::string model_path, out_path;
  DataSource extract_data;
  auto* extract_cmd = app.add_subcommand("extract", "write output-layer features for a dataset");
  extract_cmd->add_option("--config", config_path, "key = value configuration file");
  extract_cmd->add_option("--model", model_path)->required();
  add_data_options(*extract_cmd, extract_data);
  extract_cmd->add_option("--out", out_path)->required();

  std::string features_path, test_path, format = "kv";
  std::size_t eval_k = 1;
  double epsilon = 1e-3;
  auto* eval_cmd = app.add_subcommand("eval", "kNN accuracy, scatter ratio and sparsity of a feature CSV");
  eval_cmd->add_option("--config", config_path, "key = value configuration file");
  eval_cmd->add_option("--features", features_path)->required();
  eval_cmd->add_option("--test", test_path, "held-out feature CSV; default is leave-one-out");
  eval_cmd->add_option("--k", eval_k);
  eval_cmd->add_option("--epsilon", epsilon, "near-zero threshold");
  eval_cmd->add_option("--format", format)->check(CLI::IsMember({"kv", "csv"}));

  DataSource pairs_data;
  std::string pairs_mode = "full", pairs_out;
  std::size_t pairs_k = 3;
  bool pairs_exclude_self = false;
  auto* pairs_cmd = app.add_subcommand("pairs", "dump the pair list as CSV");
  pairs_cmd->add_option("--config", config_path, "key = value configuration file");
  add_data_options(*pairs_cmd, pairs_data);
  pairs_cmd->add_option("--pairs", pairs_mode)->check(CLI::IsMember({"full", "heuristic"}));
  pairs_cmd->add_option("--k", pairs_k);
  pairs_cmd->add_flag("--exclude-self-pairs", pairs_exclude_self);
  pairs_cmd->add_option("--out", pairs_out, "output path (default stdout)");

  GradcheckSpec gc;
  std::uint64_t gc_seed = 1;
  double gc_threshold = 1e-4;
  bool sabotage = false;
  double gc_lambdas[4] = {gc.hp.lambda1, gc.hp.lambda2, gc.hp.lambda3, gc.hp.lambda4};
  auto* gc_cmd = app.add_subcommand("gradcheck", "compare the analytic gradient with central differences");
  gc_cmd->add_option("--config", config_path, "key = value configuration file");
  gc_cmd->add_option("--layers", gc.layer_sizes, "layer sizes including input and output")->delimiter(',');
  gc_cmd->add_option("--m", gc.m, "number of examples");
  gc_cmd->add_option("--classes", gc.classes);
  for (int i = 0; i < 4; ++i) gc_cmd->add_option("--lambda" + std::to_string(i + 1), gc_lambdas[i]);
  gc_cmd->add_option("--step", gc.step, "finite-difference step");
  gc_cmd->add_option("--threshold", gc_threshold);
  gc_cmd->add_option("--seed", gc_seed);
  gc_cmd->add_flag("--sabotage-sign", sabotage, "negate the analytic gradient (fault injection)")->group("");

  try {
    const std::vector<std::string> expanded = expand_config(args);
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*train_cmd) {
      cfg.hp.lambda1 = lambdas[0];
      cfg.hp.lambda2 = lambdas[1];
      cfg.hp.lambda3 = lambdas[2];
      cfg.hp.lambda4 = lambdas[3];
      return cmd_train(cfg, out);
    }
    if (*extract_cmd) return cmd_extract(model_path, extract_data, out_path, out);
    if (*eval_cmd) return cmd_eval(features_path, test_path, eval_k, epsilon, format, out);
    if (*pairs_cmd) return cmd_pairs(pairs_data, pairs_mode, pairs_k, pairs_exclude_self, pairs_out, out);
    if (*gc_cmd) {
      gc.hp.lambda1 = gc_lambdas[0];
      gc.hp.lambda2 = gc_lambdas[1];
      gc.hp.lambda3 = gc_lambdas[2];
      gc.hp.lambda4 = gc_lambdas[3];
      return cmd_gradcheck(gc, gc_seed, gc_threshold, sabotage, out, err);
    }
  } catch (const CLI::ValidationError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}

}  // namespace senns::cli

#endif  // SENNS_CLI_HPP
