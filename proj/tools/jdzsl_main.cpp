/*
 * Copyright 2026 the jdzsl authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <jdzsl/jdzsl.hpp>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace {

using jdzsl::HyperParams;
using jdzsl::Index;
using jdzsl::Matrix;
using jdzsl::SynthSpec;

// exit codes: 0 success, 1 usage, 2 data, 3 numerical
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

// ---------------------------------------------------------------------------
// config file: `key=value` lines, `#` comments; CLI flags take precedence

std::map<std::string, std::string> parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw jdzsl::data_error("cannot read config " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw jdzsl::data_error(path + ":" + std::to_string(lineno) +
                              ": expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

double to_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw jdzsl::data_error("config: bad value for " + key + ": '" + value +
                            "'");
  }
}

long long to_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw jdzsl::data_error("config: bad value for " + key + ": '" + value +
                            "'");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "no") return false;
  throw jdzsl::data_error("config: bad value for " + key + ": '" + value +
                          "'");
}

bool set_hyper(HyperParams& hp, const std::string& key,
               const std::string& value) {
  if (key == "lambda") hp.lambda = to_double(key, value);
  else if (key == "gamma") hp.gamma = to_double(key, value);
  else if (key == "rho") hp.rho = to_double(key, value);
  else if (key == "r") hp.r = static_cast<int>(to_int(key, value));
  else if (key == "outer-iters") hp.outer_iters = static_cast<int>(to_int(key, value));
  else if (key == "fista-max-iter") hp.fista_max_iter = static_cast<int>(to_int(key, value));
  else if (key == "fista-tol") hp.fista_tol = to_double(key, value);
  else if (key == "aaw-max-iter") hp.aaw_max_iter = static_cast<int>(to_int(key, value));
  else if (key == "aaw-step") hp.aaw_step = to_double(key, value);
  else if (key == "knn-k") hp.knn_k = static_cast<int>(to_int(key, value));
  else if (key == "lp-alpha") hp.lp_alpha = to_double(key, value);
  else if (key == "tsne-perplexity") hp.tsne_perplexity = to_double(key, value);
  else if (key == "tsne-iters") hp.tsne_iters = static_cast<int>(to_int(key, value));
  else if (key == "seed") hp.seed = static_cast<std::uint64_t>(to_int(key, value));
  else return false;
  return true;
}

bool set_synth(SynthSpec& spec, const std::string& key,
               const std::string& value) {
  if (key == "p") spec.p = static_cast<Index>(to_int(key, value));
  else if (key == "q") spec.q = static_cast<Index>(to_int(key, value));
  else if (key == "r-true") spec.r_true = static_cast<Index>(to_int(key, value));
  else if (key == "k-true") spec.k_true = static_cast<Index>(to_int(key, value));
  else if (key == "n-seen") spec.n_seen = static_cast<Index>(to_int(key, value));
  else if (key == "m-unseen") spec.m_unseen = static_cast<Index>(to_int(key, value));
  else if (key == "noise-sigma") spec.noise_sigma = to_double(key, value);
  else if (key == "shift-sigma") spec.shift_sigma = to_double(key, value);
  else if (key == "seed") spec.seed = static_cast<std::uint64_t>(to_int(key, value));
  else return false;
  return true;
}

const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = {
      "lambda",       "gamma",          "rho",
      "r",            "outer-iters",    "fista-max-iter",
      "fista-tol",    "aaw-max-iter",   "aaw-step",
      "knn-k",        "lp-alpha",       "tsne-perplexity",
      "tsne-iters",   "seed",           "normalize-l2",
      "p",            "q",              "r-true",
      "k-true",       "n-seen",         "m-unseen",
      "noise-sigma",  "shift-sigma"};
  return keys;
}

// applies config values below CLI flags: a key is skipped when its flag was
// given on the command line
struct ConfigScope {
  CLI::App* cmd = nullptr;
  std::string path;

  bool flag_given(const std::string& key) const {
    auto* opt = cmd->get_option_no_throw("--" + key);
    return opt != nullptr && opt->count() > 0;
  }

  void apply(HyperParams* hp, SynthSpec* spec, bool* normalize) const {
    if (path.empty()) return;
    for (const auto& [key, value] : parse_config(path)) {
      if (!known_config_keys().count(key))
        throw jdzsl::data_error("config: unknown key '" + key + "'");
      if (flag_given(key)) continue;
      if (key == "normalize-l2") {
        if (normalize) *normalize = to_bool(key, value);
        continue;
      }
      if (hp && set_hyper(*hp, key, value)) continue;
      if (spec) set_synth(*spec, key, value);
      // keys for other subcommands are tolerated
    }
  }

  // re-applies every hyperparameter flag the user passed; used when the base
  // values come from a model file instead of the bound defaults
  void apply_flag_overrides(HyperParams& hp) const {
    static const char* keys[] = {
        "lambda",       "gamma",          "rho",       "r",
        "outer-iters",  "fista-max-iter", "fista-tol", "aaw-max-iter",
        "aaw-step",     "knn-k",          "lp-alpha",  "tsne-perplexity",
        "tsne-iters",   "seed"};
    for (const char* key : keys) {
      if (!flag_given(key)) continue;
      auto* opt = cmd->get_option_no_throw(std::string("--") + key);
      set_hyper(hp, key, opt->results().front());
    }
  }
};

void add_hyper_flags(CLI::App* cmd, HyperParams& hp) {
  cmd->add_option("--lambda", hp.lambda, "sparsity weight");
  cmd->add_option("--gamma", hp.gamma, "entropy weight");
  cmd->add_option("--rho", hp.rho, "t-kernel parameter");
  cmd->add_option("--r", hp.r, "dictionary atoms");
  cmd->add_option("--outer-iters", hp.outer_iters, "training rounds");
  cmd->add_option("--fista-max-iter", hp.fista_max_iter, "lasso iteration cap");
  cmd->add_option("--fista-tol", hp.fista_tol, "lasso stopping tolerance");
  cmd->add_option("--aaw-max-iter", hp.aaw_max_iter,
                  "attribute-aware iteration cap");
  cmd->add_option("--aaw-step", hp.aaw_step,
                  "attribute-aware step (<= 0 selects 1/L)");
  cmd->add_option("--knn-k", hp.knn_k, "graph neighbors");
  cmd->add_option("--lp-alpha", hp.lp_alpha, "propagation alpha in (0,1)");
  cmd->add_option("--tsne-perplexity", hp.tsne_perplexity, "t-SNE perplexity");
  cmd->add_option("--tsne-iters", hp.tsne_iters, "t-SNE iterations");
  cmd->add_option("--seed", hp.seed, "random seed");
}

Matrix load_features(const std::string& path, bool normalize) {
  Matrix m = jdzsl::read_matrix(path);
  if (normalize) jdzsl::normalize_columns(m);
  return m;
}

jdzsl::UnseenPrototypes load_prototypes(const std::string& attr_path,
                                        const std::string& label_path,
                                        bool normalize) {
  jdzsl::UnseenPrototypes protos;
  protos.attributes = load_features(attr_path, normalize);
  protos.labels = jdzsl::read_labels(label_path);
  jdzsl::validate(protos);
  return protos;
}

std::vector<jdzsl::EvalMode> parse_modes(const std::string& csv) {
  std::vector<jdzsl::EvalMode> modes;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "aag") modes.push_back(jdzsl::EvalMode::AAg);
    else if (item == "aaw") modes.push_back(jdzsl::EvalMode::AAw);
    else if (item == "taaw") modes.push_back(jdzsl::EvalMode::TAAw);
    else throw jdzsl::data_error("unknown mode '" + item +
                                 "' (expected aag, aaw, taaw)");
  }
  if (modes.empty()) throw jdzsl::data_error("no evaluation modes selected");
  return modes;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw jdzsl::data_error("cannot write " + path);
  out << text;
  if (!out) throw jdzsl::data_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// subcommands

struct SynthArgs {
  SynthSpec spec;
  std::string out_dir;
  bool csv = false;
  ConfigScope config;
};

void run_synth(const SynthArgs& args) {
  SynthSpec spec = args.spec;
  args.config.apply(nullptr, &spec, nullptr);
  auto data = jdzsl::gen_synthetic(spec);

  namespace fs = std::filesystem;
  fs::create_directories(args.out_dir);
  const std::string ext = args.csv ? ".csv" : ".jmat";
  auto path = [&](const std::string& name) {
    return (fs::path(args.out_dir) / (name + ext)).string();
  };
  auto txt = [&](const std::string& name) {
    return (fs::path(args.out_dir) / (name + ".txt")).string();
  };

  jdzsl::write_matrix(path("features"), data.seen.features);
  jdzsl::write_matrix(path("attributes"), data.seen.attributes);
  jdzsl::write_labels(txt("labels"), data.seen.labels);
  jdzsl::write_matrix(path("prototypes"), data.protos.attributes);
  jdzsl::write_labels(txt("prototype_labels"), data.protos.labels);
  jdzsl::write_matrix(path("test_features"), data.test_features);
  jdzsl::write_labels(txt("test_truth"), data.test_truth);

  std::printf("wrote synthetic dataset to %s\n", args.out_dir.c_str());
  std::printf("seen: %lld samples, %zu classes; unseen: %lld prototypes; "
              "test: %lld samples\n",
              static_cast<long long>(data.seen.features.cols()),
              std::set<int>(data.seen.labels.begin(), data.seen.labels.end())
                  .size(),
              static_cast<long long>(data.protos.attributes.cols()),
              static_cast<long long>(data.test_features.cols()));
}

struct TrainArgs {
  std::string features, attributes, labels, prototypes, proto_labels;
  std::string model_out, trace_out;
  HyperParams hp;
  bool normalize = false;
  ConfigScope config;
};

void run_train(const TrainArgs& args) {
  HyperParams hp = args.hp;
  bool normalize = args.normalize;
  args.config.apply(&hp, nullptr, &normalize);

  jdzsl::SeenDataset data;
  data.features = load_features(args.features, normalize);
  data.attributes = load_features(args.attributes, normalize);
  data.labels = jdzsl::read_labels(args.labels);
  jdzsl::validate(data);
  auto protos = load_prototypes(args.prototypes, args.proto_labels, normalize);

  auto [dict, report] = jdzsl::train(data, protos, hp);
  jdzsl::save_model(args.model_out, dict, hp);

  if (!args.trace_out.empty()) {
    std::string text;
    for (double v : report.objective_trace)
      text += jdzsl::format_double(v) + "\n";
    write_text(args.trace_out, text);
  }

  std::printf("trained %d rounds: objective %s -> %s\n", hp.outer_iters,
              jdzsl::format_double(report.objective_trace.front()).c_str(),
              jdzsl::format_double(report.objective_trace.back()).c_str());
  std::printf("model written to %s\n", args.model_out.c_str());
}

struct PredictArgs {
  std::string model, features, prototypes, proto_labels;
  std::string mode = "aag";
  std::string zhat_out, codes_out, soft_out;
  HyperParams hp;
  bool normalize = false;
  ConfigScope config;
};

void run_predict(const PredictArgs& args) {
  auto [dict, hp] = jdzsl::load_model(args.model);
  // model parameters are the base; config values then flags override
  bool normalize = args.normalize;
  args.config.apply(&hp, nullptr, &normalize);
  args.config.apply_flag_overrides(hp);

  Matrix features = load_features(args.features, normalize);
  auto protos = load_prototypes(args.prototypes, args.proto_labels, normalize);
  const auto mode = args.mode == "aaw" ? jdzsl::PredictMode::AAw
                                       : jdzsl::PredictMode::AAg;

  auto result = jdzsl::predict_batch(dict, features, protos, hp, mode);
  jdzsl::write_matrix(args.zhat_out, result.predicted_attributes);
  if (!args.codes_out.empty()) jdzsl::write_matrix(args.codes_out, result.codes);
  if (!args.soft_out.empty()) {
    Matrix probs(static_cast<Index>(result.assignments.size()),
                 protos.attributes.cols());
    for (Index i = 0; i < probs.rows(); ++i)
      probs.row(i) = result.assignments[static_cast<size_t>(i)].probs;
    jdzsl::write_matrix(args.soft_out, probs);
  }
  std::printf("predicted %lld samples (%s) -> %s\n",
              static_cast<long long>(features.cols()), args.mode.c_str(),
              args.zhat_out.c_str());
}

struct AssignArgs {
  std::string zhat, prototypes, proto_labels;
  std::string strategy = "nn";
  std::string out, embedding_out;
  std::string embedding = "tsne";
  HyperParams hp;
  ConfigScope config;
};

void run_assign(const AssignArgs& args) {
  HyperParams hp = args.hp;
  args.config.apply(&hp, nullptr, nullptr);

  Matrix zhat = jdzsl::read_matrix(args.zhat);
  auto protos = load_prototypes(args.prototypes, args.proto_labels, false);

  std::vector<int> labels;
  if (args.strategy == "nn") {
    labels = jdzsl::nn_assign(zhat, protos);
    if (!args.embedding_out.empty())
      throw jdzsl::data_error("--emit-embedding requires --strategy taaw");
  } else if (args.strategy == "taaw") {
    jdzsl::TaawOptions options;
    options.embedding = args.embedding == "identity"
                            ? jdzsl::EmbeddingKind::Identity
                            : jdzsl::EmbeddingKind::Tsne;
    auto result = jdzsl::taaw_run(zhat, protos, hp, options);
    labels = result.labels;
    if (!args.embedding_out.empty()) {
      std::string text = "node_id,is_prototype,x,y,label\n";
      const Index m = protos.attributes.cols();
      for (Index i = 0; i < result.embedding.cols(); ++i) {
        const bool proto = i < m;
        const int label =
            proto ? protos.labels[static_cast<size_t>(i)]
                  : labels[static_cast<size_t>(i - m)];
        text += std::to_string(i) + "," + (proto ? "1" : "0") + "," +
                jdzsl::format_double(result.embedding(0, i)) + "," +
                jdzsl::format_double(result.embedding(1, i)) + "," +
                std::to_string(label) + "\n";
      }
      write_text(args.embedding_out, text);
    }
  } else {
    throw jdzsl::data_error("unknown strategy '" + args.strategy +
                            "' (expected nn or taaw)");
  }

  jdzsl::write_labels(args.out, labels);
  std::printf("assigned %zu samples (%s) -> %s\n", labels.size(),
              args.strategy.c_str(), args.out.c_str());
}

struct EvaluateArgs {
  std::string model, features, truth, prototypes, proto_labels;
  std::string strategy = "aag,aaw,taaw";
  std::string report_out;
  int repeats = 1;
  HyperParams hp;
  bool normalize = false;
  ConfigScope config;
};

void run_evaluate(const EvaluateArgs& args) {
  auto [dict, hp] = jdzsl::load_model(args.model);
  // model parameters are the base; config values then flags override
  bool normalize = args.normalize;
  args.config.apply(&hp, nullptr, &normalize);
  args.config.apply_flag_overrides(hp);
  if (args.repeats < 1) throw jdzsl::data_error("--repeats must be positive");

  Matrix features = load_features(args.features, normalize);
  std::vector<int> truth = jdzsl::read_labels(args.truth);
  auto protos = load_prototypes(args.prototypes, args.proto_labels, normalize);
  auto modes = parse_modes(args.strategy);

  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < args.repeats; ++i) seeds.push_back(hp.seed + i);

  auto reports =
      jdzsl::evaluate(dict, features, truth, protos, hp, modes, seeds);

  std::printf("%-6s %10s %10s %10s\n", "mode", "hit@1", "hit@3", "hit@5");
  for (const auto& [mode, report] : reports)
    std::printf("%-6s %10.4f %10.4f %10.4f\n", jdzsl::to_string(mode).c_str(),
                report.hit_at.at(1), report.hit_at.at(3), report.hit_at.at(5));

  const std::string rendered = jdzsl::render_report(reports);
  if (!args.report_out.empty()) write_text(args.report_out, rendered);
  else std::fputs(rendered.c_str(), stdout);
}

struct Lemma1Args {
  std::string p_list = "32,64,128,256";
  int trials = 50;
  SynthSpec tmpl;
  std::string out;
  ConfigScope config;
};

void run_lemma1(const Lemma1Args& args) {
  SynthSpec tmpl = args.tmpl;
  args.config.apply(nullptr, &tmpl, nullptr);

  std::vector<Index> p_values;
  std::stringstream ss(args.p_list);
  std::string item;
  while (std::getline(ss, item, ','))
    p_values.push_back(static_cast<Index>(to_int("p-list", item)));

  auto result = jdzsl::lemma1_study(p_values, args.trials, tmpl);

  std::printf("%8s %16s\n", "p", "mean_error");
  std::string text;
  for (const auto& row : result.rows) {
    std::printf("%8lld %16.8f\n", static_cast<long long>(row.p),
                row.mean_error);
    text += "mean_error[" + std::to_string(row.p) +
            "]=" + jdzsl::format_double(row.mean_error) + "\n";
  }
  std::printf("fitted constant: %.6f  (error ~ c * sqrt(k log(r) / p))\n",
              result.fitted_constant);
  text += "fitted_constant=" + jdzsl::format_double(result.fitted_constant) +
          "\n";
  if (!args.out.empty()) write_text(args.out, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zero-shot attribute prediction via coupled sparse dictionaries"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd =
      app.add_subcommand("synth", "generate a synthetic dataset");
  synth_cmd->add_option("--out-dir", synth.out_dir, "output directory")
      ->required();
  synth_cmd->add_option("--p", synth.spec.p, "feature dimension");
  synth_cmd->add_option("--q", synth.spec.q, "attribute dimension");
  synth_cmd->add_option("--r-true", synth.spec.r_true, "generating atoms");
  synth_cmd->add_option("--k-true", synth.spec.k_true, "true sparsity");
  synth_cmd->add_option("--n-seen", synth.spec.n_seen, "seen samples");
  synth_cmd->add_option("--m-unseen", synth.spec.m_unseen, "unseen classes");
  synth_cmd->add_option("--noise-sigma", synth.spec.noise_sigma,
                        "test feature noise");
  synth_cmd->add_option("--shift-sigma", synth.spec.shift_sigma,
                        "class-conditional shift magnitude");
  synth_cmd->add_option("--seed", synth.spec.seed, "random seed");
  synth_cmd->add_flag("--csv", synth.csv, "write csv instead of raw matrices");
  synth_cmd->add_option("--config", synth.config.path, "key=value config file");
  synth.config.cmd = synth_cmd;

  TrainArgs train;
  auto* train_cmd =
      app.add_subcommand("train", "learn the coupled dictionaries");
  train_cmd->add_option("--features", train.features, "seen features matrix")
      ->required();
  train_cmd
      ->add_option("--attributes", train.attributes, "seen attributes matrix")
      ->required();
  train_cmd->add_option("--labels", train.labels, "seen labels file")
      ->required();
  train_cmd
      ->add_option("--prototypes", train.prototypes,
                   "unseen prototype attribute matrix")
      ->required();
  train_cmd
      ->add_option("--proto-labels", train.proto_labels,
                   "unseen prototype labels file")
      ->required();
  train_cmd->add_option("--model", train.model_out, "model output path")
      ->required();
  train_cmd->add_option("--trace", train.trace_out,
                        "objective trace output path");
  add_hyper_flags(train_cmd, train.hp);
  train_cmd->add_flag("--normalize-l2", train.normalize,
                      "l2-normalize ingested columns");
  train_cmd->add_option("--config", train.config.path, "key=value config file");
  train.config.cmd = train_cmd;

  PredictArgs predict;
  auto* predict_cmd =
      app.add_subcommand("predict", "predict attributes of unseen features");
  predict_cmd->add_option("--model", predict.model, "trained model")
      ->required();
  predict_cmd->add_option("--features", predict.features, "test features")
      ->required();
  predict_cmd
      ->add_option("--prototypes", predict.prototypes, "prototype matrix")
      ->required();
  predict_cmd
      ->add_option("--proto-labels", predict.proto_labels, "prototype labels")
      ->required();
  predict_cmd
      ->add_option("--mode", predict.mode, "prediction mode")
      ->check(CLI::IsMember({"aag", "aaw"}));
  predict_cmd->add_option("--zhat", predict.zhat_out,
                          "predicted attributes output")
      ->required();
  predict_cmd->add_option("--codes", predict.codes_out, "sparse codes output");
  predict_cmd->add_option("--soft", predict.soft_out,
                          "soft assignment output");
  add_hyper_flags(predict_cmd, predict.hp);
  predict_cmd->add_flag("--normalize-l2", predict.normalize,
                        "l2-normalize ingested columns");
  predict_cmd->add_option("--config", predict.config.path,
                          "key=value config file");
  predict.config.cmd = predict_cmd;

  AssignArgs assign;
  auto* assign_cmd =
      app.add_subcommand("assign", "assign labels to predicted attributes");
  assign_cmd->add_option("--zhat", assign.zhat, "predicted attributes matrix")
      ->required();
  assign_cmd->add_option("--prototypes", assign.prototypes, "prototype matrix")
      ->required();
  assign_cmd
      ->add_option("--proto-labels", assign.proto_labels, "prototype labels")
      ->required();
  assign_cmd->add_option("--strategy", assign.strategy, "nn or taaw")
      ->check(CLI::IsMember({"nn", "taaw"}));
  assign_cmd->add_option("--out", assign.out, "labels output path")
      ->required();
  assign_cmd->add_option("--emit-embedding", assign.embedding_out,
                         "write 2-D embedding coordinates (taaw)");
  assign_cmd->add_option("--embedding", assign.embedding,
                         "taaw embedding: tsne or identity")
      ->check(CLI::IsMember({"tsne", "identity"}));
  add_hyper_flags(assign_cmd, assign.hp);
  assign_cmd->add_option("--config", assign.config.path,
                         "key=value config file");
  assign.config.cmd = assign_cmd;

  EvaluateArgs evaluate;
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "end-to-end evaluation report");
  evaluate_cmd->add_option("--model", evaluate.model, "trained model")
      ->required();
  evaluate_cmd
      ->add_option("--test-features", evaluate.features, "test features")
      ->required();
  evaluate_cmd->add_option("--truth", evaluate.truth, "true labels file")
      ->required();
  evaluate_cmd
      ->add_option("--prototypes", evaluate.prototypes, "prototype matrix")
      ->required();
  evaluate_cmd
      ->add_option("--proto-labels", evaluate.proto_labels,
                   "prototype labels")
      ->required();
  evaluate_cmd->add_option("--strategy", evaluate.strategy,
                           "comma list of aag, aaw, taaw");
  evaluate_cmd->add_option("--repeats", evaluate.repeats,
                           "seeds per mode (seed, seed+1, ...)");
  evaluate_cmd->add_option("--report", evaluate.report_out,
                           "machine-readable report output");
  add_hyper_flags(evaluate_cmd, evaluate.hp);
  evaluate_cmd->add_flag("--normalize-l2", evaluate.normalize,
                         "l2-normalize ingested columns");
  evaluate_cmd->add_option("--config", evaluate.config.path,
                           "key=value config file");
  evaluate.config.cmd = evaluate_cmd;

  Lemma1Args lemma1;
  lemma1.tmpl.r_true = 512;
  lemma1.tmpl.k_true = 4;
  lemma1.tmpl.noise_sigma = 0.01;
  auto* lemma1_cmd =
      app.add_subcommand("lemma1", "sparse-recovery scaling study");
  lemma1_cmd->add_option("--p-list", lemma1.p_list,
                         "comma list of design heights");
  lemma1_cmd->add_option("--trials", lemma1.trials, "trials per height");
  lemma1_cmd->add_option("--r-true", lemma1.tmpl.r_true, "design columns");
  lemma1_cmd->add_option("--k-true", lemma1.tmpl.k_true, "true sparsity");
  lemma1_cmd->add_option("--noise-sigma", lemma1.tmpl.noise_sigma,
                         "observation noise");
  lemma1_cmd->add_option("--seed", lemma1.tmpl.seed, "random seed");
  lemma1_cmd->add_option("--out", lemma1.out,
                         "machine-readable table output");
  lemma1_cmd->add_option("--config", lemma1.config.path,
                         "key=value config file");
  lemma1.config.cmd = lemma1_cmd;

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (synth_cmd->parsed()) run_synth(synth);
    else if (train_cmd->parsed()) run_train(train);
    else if (predict_cmd->parsed()) run_predict(predict);
    else if (assign_cmd->parsed()) run_assign(assign);
    else if (evaluate_cmd->parsed()) run_evaluate(evaluate);
    else if (lemma1_cmd->parsed()) run_lemma1(lemma1);
  } catch (const jdzsl::numeric_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const jdzsl::data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
