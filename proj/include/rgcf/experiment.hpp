/*
 * Copyright 2026 The RGCF Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef RGCF_EXPERIMENT_HPP
#define RGCF_EXPERIMENT_HPP

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "rgcf/aggregators.hpp"
#include "rgcf/attacks.hpp"
#include "rgcf/bench.hpp"
#include "rgcf/compare.hpp"
#include "rgcf/csv.hpp"
#include "rgcf/data.hpp"
#include "rgcf/filter.hpp"
#include "rgcf/filter_io.hpp"
#include "rgcf/models.hpp"
#include "rgcf/simulation.hpp"

namespace rgcf {

enum class ExitCode : int { Ok = 0, Validation = 1, Runtime = 2 };

/// Flat key=value settings shared by every command. Values are kept as the
/// strings the user wrote, so a manifest reproduces the exact doubles.
class ExperimentConfig {
 public:
  ExperimentConfig() : values_(defaults()) {}

  static const std::map<std::string, std::string>& defaults() {
    static const std::map<std::string, std::string> d = {
        {"seed", "0"},
        {"out", "out"},
        // data
        {"dataset", "blobs"},
        {"blobs_classes", "10"},
        {"blobs_in_dim", "10"},
        {"blobs_separation", "4"},
        {"blobs_train_per_class", "1000"},
        {"blobs_val_per_class", "200"},
        {"local_size", "10000"},
        {"train_images", ""},
        {"train_labels", ""},
        {"val_images", ""},
        {"val_labels", ""},
        // server model
        {"model", "logistic"},
        {"hidden", "64"},
        // simulation
        {"method", "rgcf"},
        {"f_count", "0"},
        {"krum_distance", "squared"},
        {"n_workers", "10"},
        {"byzantine_fraction", "0"},
        {"attack", "inverse"},
        {"attack_scale", "default"},
        {"steps", "1000"},
        {"server_lr", "0.01"},
        {"batch_size", "128"},
        {"eval_every", "25"},
        {"filter_path", ""},
        // filter training
        {"episodes", "1"},
        {"filter_steps", "500"},
        {"positive_weight", "10"},
        {"filter_lr", "0.003"},
        {"threshold", "0.5"},
        {"unit_norm", "false"},
        {"training_attack", "random_gaussian"},
        {"training_attack_scale", "default"},
        // bench
        {"bench_methods", "rgcf,krum,median,trimmed_mean,bulyan"},
        {"bench_n", "10"},
        {"bench_d", "100000"},
        {"bench_reps", "100"},
        {"bench_f", "default"},
        {"bench_transfer", "false"},
        // compare
        {"compare_methods", "rgcf,krum,bulyan,trimmed_mean,median"},
        {"compare_attacks", "random_gaussian,inverse,all_ones,gradient_shift"},
        {"compare_fractions", "0.2,0.33,0.5,0.9"},
    };
    return d;
  }

  void set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw Error(ErrorKind::InvalidArgument, "unknown config key '" + key + "'");
    it->second = value;
  }

  /// Parses a `key=value` assignment as given to --set.
  void set_assignment(std::string_view text) {
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::InvalidArgument, "expected key=value, got '" + std::string(text) + "'");
    }
    set(trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
  }

  void load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidArgument, "cannot read config " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string body = trim(line);
      if (body.empty()) continue;
      try {
        set_assignment(body);
      } catch (const Error& e) {
        throw Error(ErrorKind::InvalidArgument, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
  }

  const std::string& get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw Error(ErrorKind::InvalidArgument, "unknown config key '" + key + "'");
    return it->second;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

  /// Every key in sorted order; loadable with load_file.
  void write_manifest(const std::filesystem::path& path, std::string_view command) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << "# rgcf " << command << "\n";
    for (const auto& [k, v] : values_) out << k << '=' << v << '\n';
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
  }

 private:
  static std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
  }

  std::map<std::string, std::string> values_;
};

namespace detail {

inline Error bad_value(const std::string& key, const std::string& value, const char* expected) {
  return Error(ErrorKind::InvalidArgument, key + "='" + value + "': expected " + expected);
}

inline std::uint64_t parse_u64(const ExperimentConfig& c, const std::string& key) {
  const std::string& v = c.get(key);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) throw bad_value(key, v, "a non-negative integer");
  return out;
}

inline std::size_t parse_size(const ExperimentConfig& c, const std::string& key) {
  return static_cast<std::size_t>(parse_u64(c, key));
}

inline double parse_double_text(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty() || !std::isfinite(out)) {
    throw bad_value(key, v, "a finite number");
  }
  return out;
}

inline double parse_double(const ExperimentConfig& c, const std::string& key) {
  return parse_double_text(key, c.get(key));
}

inline bool parse_bool(const ExperimentConfig& c, const std::string& key) {
  const std::string& v = c.get(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw bad_value(key, v, "true or false");
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline AttackSpec parse_attack(const ExperimentConfig& c, const std::string& kind_key, const std::string& scale_key) {
  const auto kind = parse_attack_kind(c.get(kind_key));
  if (!kind) throw bad_value(kind_key, c.get(kind_key), "random_gaussian, inverse, all_ones or gradient_shift");
  AttackSpec spec = AttackSpec::with_default_scale(*kind);
  if (c.get(scale_key) != "default") spec.scale = parse_double(c, scale_key);
  spec.validate();
  return spec;
}

inline void require_file(const std::string& key, const std::string& path) {
  if (path.empty()) throw Error(ErrorKind::InvalidArgument, key + " is required");
  if (!std::filesystem::is_regular_file(path)) throw Error(ErrorKind::InvalidArgument, key + ": no such file " + path);
}

}  // namespace detail

/// Datasets for one experiment. `local` feeds filter training, `train` is
/// sharded across the simulated workers and `val` scores the server.
struct ExperimentData {
  Dataset train;
  Dataset local;
  Dataset val;
};

/// Typed view of an ExperimentConfig. Construction validates every field
/// and loads every input, so nothing has been written when it throws.
struct ResolvedExperiment {
  std::uint64_t seed = 0;
  std::filesystem::path out;
  ExperimentData data;
  Architecture arch;
  RunConfig run;
  std::optional<AggregatorKind> method;  // nullopt = RGCF
  std::string filter_path;
  FilterTrainConfig filter_cfg;
  std::vector<BenchMethod> bench_methods;
  std::vector<std::size_t> bench_n;
  std::size_t bench_d = 0;
  std::size_t bench_reps = 0;
  std::optional<std::size_t> bench_f;
  bool bench_transfer = false;
  CompareSetup compare;
};

inline ExperimentData load_experiment_data(const ExperimentConfig& c, std::uint64_t seed) {
  using namespace detail;
  const std::string& kind = c.get("dataset");
  const std::size_t local_size = parse_size(c, "local_size");
  if (local_size == 0) throw Error(ErrorKind::InvalidArgument, "local_size must be >= 1");
  if (kind == "blobs") {
    const std::size_t classes = parse_size(c, "blobs_classes");
    const std::size_t in_dim = parse_size(c, "blobs_in_dim");
    const double sep = parse_double(c, "blobs_separation");
    const std::size_t train_pc = parse_size(c, "blobs_train_per_class");
    const std::size_t val_pc = parse_size(c, "blobs_val_per_class");
    if (classes < 2 || in_dim < classes || train_pc == 0 || val_pc == 0) {
      throw Error(ErrorKind::InvalidArgument, "blobs needs classes >= 2, in_dim >= classes and non-zero sizes");
    }
    RngStream tr(seed, streams::kData), lr(seed, streams::kLocalData), vr(seed, streams::kValidation);
    const std::size_t local_pc = (local_size + classes - 1) / classes;
    return {synth_gaussian_blobs(classes, train_pc, in_dim, sep, tr),
            synth_gaussian_blobs(classes, local_pc, in_dim, sep, lr),
            synth_gaussian_blobs(classes, val_pc, in_dim, sep, vr)};
  }
  if (kind == "idx") {
    require_file("train_images", c.get("train_images"));
    require_file("train_labels", c.get("train_labels"));
    require_file("val_images", c.get("val_images"));
    require_file("val_labels", c.get("val_labels"));
    Dataset all = load_idx(c.get("train_images"), c.get("train_labels"));
    Dataset val = load_idx(c.get("val_images"), c.get("val_labels"));
    if (val.in_dim != all.in_dim) throw Error(ErrorKind::ShapeMismatch, "train and val images differ in size");
    if (all.size() <= local_size) {
      throw Error(ErrorKind::InvalidArgument, "training set must be larger than local_size");
    }
    const std::size_t classes = std::max(all.classes, val.classes);
    all.classes = val.classes = classes;
    // One Fisher-Yates pass splits the file into the local subset and the
    // server's training part.
    RngStream rng(seed, streams::kLocalData);
    std::vector<std::size_t> order(all.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
    const std::span<const std::size_t> idx(order);
    return {all.subset(idx.subspan(local_size)), all.subset(idx.first(local_size)), std::move(val)};
  }
  throw bad_value("dataset", kind, "blobs or idx");
}

inline ResolvedExperiment resolve_experiment(const ExperimentConfig& c) {
  using namespace detail;
  ResolvedExperiment r;
  r.seed = parse_u64(c, "seed");
  r.out = c.get("out");
  if (r.out.empty()) throw Error(ErrorKind::InvalidArgument, "out must not be empty");

  // Cheap checks first so a typo fails before any data is generated.
  const std::string& model = c.get("model");
  if (model != "logistic" && model != "mlp") throw bad_value("model", model, "logistic or mlp");
  const std::size_t hidden = parse_size(c, "hidden");

  RunConfig& run = r.run;
  run.seed = r.seed;
  run.n_workers = parse_size(c, "n_workers");
  run.byzantine_fraction = parse_double(c, "byzantine_fraction");
  run.attack = parse_attack(c, "attack", "attack_scale");
  run.steps = parse_size(c, "steps");
  run.server_lr = parse_double(c, "server_lr");
  run.batch_size = parse_size(c, "batch_size");
  run.eval_every = parse_size(c, "eval_every");
  if (c.get("method") != "rgcf") {
    const auto kind = parse_aggregator_kind(c.get("method"));
    if (!kind) throw bad_value("method", c.get("method"), "rgcf, mean, krum, median, trimmed_mean or bulyan");
    r.method = *kind;
    run.mode = RunMode::Aggregator;
  }
  run.aggregator.kind = r.method.value_or(AggregatorKind::Mean);
  run.aggregator.f_count = parse_size(c, "f_count");
  const std::string& dist = c.get("krum_distance");
  if (dist == "squared") {
    run.aggregator.distance = KrumDistance::Squared;
  } else if (dist == "plain") {
    run.aggregator.distance = KrumDistance::Plain;
  } else {
    throw bad_value("krum_distance", dist, "squared or plain");
  }
  r.filter_path = c.get("filter_path");

  FilterTrainConfig& fc = r.filter_cfg;
  fc.episodes = parse_size(c, "episodes");
  fc.steps_per_episode = parse_size(c, "filter_steps");
  fc.positive_weight = parse_double(c, "positive_weight");
  fc.filter_lr = parse_double(c, "filter_lr");
  fc.server_lr = run.server_lr;
  fc.batch_size = run.batch_size;
  fc.threshold = parse_double(c, "threshold");
  fc.unit_norm_input = parse_bool(c, "unit_norm");
  if (c.get("training_attack") == "none") {
    fc.training_attack.reset();
  } else {
    fc.training_attack = parse_attack(c, "training_attack", "training_attack_scale");
  }
  if (fc.steps_per_episode == 0) throw Error(ErrorKind::InvalidArgument, "filter_steps must be >= 1");
  fc.validate();

  for (const auto& name : split_list(c.get("bench_methods"))) {
    const auto m = BenchMethod::parse(name);
    if (!m) throw bad_value("bench_methods", name, "rgcf or an aggregator name");
    r.bench_methods.push_back(*m);
  }
  for (const auto& n : split_list(c.get("bench_n"))) {
    const double v = parse_double_text("bench_n", n);
    if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v))) throw bad_value("bench_n", n, "integers >= 1");
    r.bench_n.push_back(static_cast<std::size_t>(v));
  }
  r.bench_d = parse_size(c, "bench_d");
  r.bench_reps = parse_size(c, "bench_reps");
  if (c.get("bench_f") != "default") r.bench_f = parse_size(c, "bench_f");
  r.bench_transfer = parse_bool(c, "bench_transfer");
  if (r.bench_d == 0) throw Error(ErrorKind::InvalidArgument, "bench_d must be >= 1");
  if (r.bench_reps < 10) throw Error(ErrorKind::InvalidArgument, "bench_reps must be >= 10");
  for (const auto& m : r.bench_methods) {
    if (!m.aggregator) continue;
    for (std::size_t n : r.bench_n) check_preconditions({*m.aggregator, r.bench_f.value_or(default_bench_f(n))}, n);
  }

  for (const auto& name : split_list(c.get("compare_methods"))) {
    const auto m = BenchMethod::parse(name);
    if (!m) throw bad_value("compare_methods", name, "rgcf or an aggregator name");
    r.compare.methods.push_back(*m);
  }
  for (const auto& name : split_list(c.get("compare_attacks"))) {
    const auto k = parse_attack_kind(name);
    if (!k) throw bad_value("compare_attacks", name, "attack names");
    r.compare.attacks.push_back(AttackSpec::with_default_scale(*k));
  }
  for (const auto& f : split_list(c.get("compare_fractions"))) {
    const double v = parse_double_text("compare_fractions", f);
    if (v < 0.0 || v > 1.0) throw bad_value("compare_fractions", f, "fractions in [0, 1]");
    r.compare.fractions.push_back(v);
  }

  r.data = load_experiment_data(c, r.seed);
  r.arch = model == "logistic" ? Architecture::logistic(r.data.train.in_dim, r.data.train.classes)
                               : Architecture::mlp(r.data.train.in_dim, {hidden}, r.data.train.classes);
  r.arch.validate();
  run.arch = r.arch;
  run.validate();
  r.compare.base = run;
  return r;
}

namespace detail {

inline FilterNet load_matching_filter(const std::string& path, const Architecture& arch) {
  require_file("filter_path", path);
  FilterNet f = load_filter(path);
  if (f.d != arch.param_count()) {
    throw Error(ErrorKind::DimensionMismatch, "filter expects d=" + std::to_string(f.d) + " but the model has d=" +
                                                  std::to_string(arch.param_count()));
  }
  return f;
}

inline void prepare_out(const ResolvedExperiment& r, const ExperimentConfig& c, std::string_view command) {
  std::filesystem::create_directories(r.out);
  c.write_manifest(r.out / "manifest.txt", command);
}

inline FilterTrainResult train_for(const ResolvedExperiment& r) {
  return train_filter(r.filter_cfg, r.data.local, r.arch, RngStream(r.seed, streams::kFilterTrainer));
}

inline void write_filter_log(const FilterTrainResult& res, const std::filesystem::path& path) {
  CsvWriter csv(path, {"episode", "step", "label", "predicted", "loss", "running_accuracy"});
  for (const auto& rec : res.log) {
    csv.cell(rec.episode).cell(rec.step).cell(std::size_t{rec.label ? 1u : 0u});
    csv.cell(rec.predicted).cell(rec.loss).cell(rec.running_accuracy).end_row();
  }
  csv.flush();
}

inline bool compare_needs_filter(const ResolvedExperiment& r) {
  return std::any_of(r.compare.methods.begin(), r.compare.methods.end(),
                     [](const BenchMethod& m) { return !m.aggregator; });
}

}  // namespace detail

/// A validated command with every input loaded.
struct PreparedCommand {
  std::string command;
  ExperimentConfig config;
  ResolvedExperiment experiment;
  std::optional<FilterNet> filter;
};

/// Everything that can be rejected without writing output happens here.
inline PreparedCommand prepare_command(std::string_view command, const ExperimentConfig& c) {
  if (command != "train-filter" && command != "run" && command != "bench" && command != "compare") {
    throw Error(ErrorKind::InvalidArgument, "unknown command '" + std::string(command) + "'");
  }
  PreparedCommand p{std::string(command), c, resolve_experiment(c), std::nullopt};
  const ResolvedExperiment& r = p.experiment;
  if (command == "run" && !r.method) p.filter = detail::load_matching_filter(r.filter_path, r.arch);
  if (command == "compare" && detail::compare_needs_filter(r) && !r.filter_path.empty()) {
    p.filter = detail::load_matching_filter(r.filter_path, r.arch);
  }
  return p;
}

/// Outputs: manifest.txt, filter.bin, filter_train.csv.
inline void cmd_train_filter(const PreparedCommand& p, std::ostream& log) {
  const ResolvedExperiment& r = p.experiment;
  detail::prepare_out(r, p.config, p.command);
  const FilterTrainResult res = detail::train_for(r);
  save_filter(res.filter, r.out / "filter.bin");
  detail::write_filter_log(res, r.out / "filter_train.csv");
  log << "filter d=" << res.filter.d << " steps=" << res.log.size()
      << " last-100 accuracy=" << format_double(res.tail_accuracy(100)) << '\n';
}

/// Outputs: manifest.txt, steps.csv, eval.csv, summary.csv.
inline void cmd_run(const PreparedCommand& p, std::ostream& log) {
  const ResolvedExperiment& r = p.experiment;
  detail::prepare_out(r, p.config, p.command);
  const RunMetrics m = p.filter ? run_rgcf(r.run, r.data.train, r.data.val, *p.filter)
                                : run_aggregated(r.run, r.data.train, r.data.val);
  write_run_csv(m, r.out);
  log << "steps=" << m.summary.steps_completed << " accepted=" << m.summary.accepted_updates()
      << " val_accuracy=" << format_double(m.summary.final_val_accuracy) << (m.summary.diverged ? " diverged" : "")
      << '\n';
}

/// Outputs: manifest.txt, bench.csv. Timings are not reproducible and are
/// the one output excluded from byte-identical reruns.
inline void cmd_bench(const PreparedCommand& p, std::ostream& log) {
  const ResolvedExperiment& r = p.experiment;
  detail::prepare_out(r, p.config, p.command);
  CsvWriter csv(r.out / "bench.csv", {"method", "n", "d", "reps", "mean_seconds", "std_seconds"});
  for (const auto& m : r.bench_methods) {
    for (std::size_t n : r.bench_n) {
      const BenchResult b = bench_filtering(m, n, r.bench_d, r.bench_reps, r.seed, r.bench_transfer, r.bench_f);
      csv.cell(b.method).cell(b.n).cell(b.d).cell(b.reps).cell(b.mean_seconds).cell(b.std_seconds).end_row();
      csv.flush();
      log << b.method << " n=" << n << " mean=" << format_double(b.mean_seconds) << "s\n";
    }
  }
}

/// Outputs: manifest.txt, compare.csv, and filter.bin/filter_train.csv
/// when the grid includes RGCF but no filter_path is given.
inline void cmd_compare(const PreparedCommand& p, std::ostream& log) {
  const ResolvedExperiment& r = p.experiment;
  detail::prepare_out(r, p.config, p.command);
  std::optional<FilterNet> filter = p.filter;
  if (detail::compare_needs_filter(r) && !filter) {
    const FilterTrainResult res = detail::train_for(r);
    save_filter(res.filter, r.out / "filter.bin");
    detail::write_filter_log(res, r.out / "filter_train.csv");
    filter = res.filter;
  }
  CsvWriter csv(r.out / "compare.csv", {"method", "attack", "fraction", "byzantine", "f_count", "verdict",
                                        "final_val_accuracy", "baseline_accuracy", "accepted_updates", "diverged"});
  run_compare(r.compare, r.data.train, r.data.val, filter ? &*filter : nullptr, [&](const CompareCell& cell) {
    csv.cell(cell.method).cell(to_string(cell.attack)).cell(cell.fraction).cell(cell.byzantine);
    if (cell.f_count) {
      csv.cell(*cell.f_count);
    } else {
      csv.cell(std::string_view{});
    }
    csv.cell(verdict_symbol(cell.verdict)).cell(cell.accuracy).cell(cell.baseline).cell(cell.accepted_updates);
    csv.cell(std::size_t{cell.diverged ? 1u : 0u}).end_row();
    csv.flush();
    log << cell.method << ' ' << to_string(cell.attack) << ' ' << format_double(cell.fraction) << ' '
        << verdict_symbol(cell.verdict) << '\n';
  });
}

/// Runs one command and maps failures to exit codes: 1 when the config or
/// an input is rejected before anything is written, 2 after that point.
inline ExitCode run_command(std::string_view command, const ExperimentConfig& c, std::ostream& log,
                            std::ostream& err) {
  std::optional<PreparedCommand> p;
  try {
    p = prepare_command(command, c);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return ExitCode::Validation;
  }
  try {
    if (command == "train-filter") {
      cmd_train_filter(*p, log);
    } else if (command == "run") {
      cmd_run(*p, log);
    } else if (command == "bench") {
      cmd_bench(*p, log);
    } else {
      cmd_compare(*p, log);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return ExitCode::Runtime;
  }
  return ExitCode::Ok;
}

}  // namespace rgcf

#endif  // RGCF_EXPERIMENT_HPP
