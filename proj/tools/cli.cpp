/*
 * Copyright 2026 The rsdnet Authors
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

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "rsdnet/contamination.hpp"
#include "rsdnet/optimizer.hpp"
#include "rsdnet/rng.hpp"
#include "rsdnet/theory.hpp"

namespace rsdnet::cli {

namespace {

// Failure classes that map onto distinct exit codes.
struct FlagError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(s);
  while (std::getline(in, part, sep)) parts.push_back(part);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

double to_real(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw FlagError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw FlagError("not a number: '" + s + "'");
  return v;
}

std::size_t to_count(const std::string& s) {
  const double v = to_real(s);
  if (v < 0 || v != std::floor(v)) throw FlagError("not a count: '" + s + "'");
  return static_cast<std::size_t>(v);
}

std::string fmt(double v) { return format_real(v); }

struct Options {
  std::string dataset = "blobs";
  std::string arch = "toy";
  std::string loss = "cce";
  std::string init = "glorot_normal";
  double beta = 0.1;
  double lambda = -0.5;
  double eta = 0.0;
  std::string attack = "none";
  double epsilon = 0.3;
  double step = 0.01;
  std::size_t iters = 100;
  std::size_t folds = 5;
  std::size_t epochs = 50;
  std::size_t surrogate_epochs = 0;
  std::size_t batch = 128;
  std::size_t limit = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string params_out;
};

void add_data_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--dataset", o.dataset,
                  "blobs[:N[:J[:DIM[:SPREAD]]]], example1[:N], idx:IMAGES,LABELS or csv:FEATURES,LABELS")
      ->capture_default_str();
  cmd->add_option("--limit", o.limit, "keep only the first N examples (0 = all)")->capture_default_str();
  cmd->add_option("--seed", o.seed, "base seed for every random draw")->required();
  cmd->add_option("--out", o.out, "output path")->required();
}

void add_training_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--arch", o.arch, "mnist-mlp, fmnist-mlp, surrogate-64, toy or mlp:W1-W2:act")->capture_default_str();
  cmd->add_option("--loss", o.loss, "comma list of cce, mae, gce:Q, tcce:D, sd, sd:BETA:LAMBDA")->capture_default_str();
  cmd->add_option("--beta", o.beta, "beta for a bare 'sd' loss")->capture_default_str();
  cmd->add_option("--lambda", o.lambda, "lambda for a bare 'sd' loss")->capture_default_str();
  cmd->add_option("--init", o.init, "glorot_normal or he_uniform")->capture_default_str();
  cmd->add_option("--eta", o.eta, "uniform label-noise proportion for training data")->capture_default_str();
  cmd->add_option("--attack", o.attack, "none, fgsm or pgd (training data replaced by attacked copies)")
      ->capture_default_str();
  cmd->add_option("--epsilon", o.epsilon, "attack L-infinity budget")->capture_default_str();
  cmd->add_option("--step", o.step, "pgd step size")->capture_default_str();
  cmd->add_option("--iters", o.iters, "pgd iterations")->capture_default_str();
  cmd->add_option("--surrogate-epochs", o.surrogate_epochs, "surrogate training epochs (0 = --epochs)")
      ->capture_default_str();
  cmd->add_option("--folds", o.folds, "number of cross-validation folds")->capture_default_str();
  cmd->add_option("--epochs", o.epochs, "training epochs")->capture_default_str();
  cmd->add_option("--batch", o.batch, "mini-batch size")->capture_default_str();
}

std::optional<AttackConfig> attack_config(const Options& o) {
  if (o.attack == "none") return std::nullopt;
  AttackConfig cfg;
  try {
    cfg.kind = parse_attack_kind(o.attack);
  } catch (const std::invalid_argument& e) {
    throw FlagError(e.what());
  }
  cfg.epsilon = o.epsilon;
  cfg.step_size = o.step;
  cfg.max_iters = o.iters;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw FlagError(e.what());
  }
  return cfg;
}

std::string contamination_label(const Options& o, const std::optional<AttackConfig>& attack) {
  if (attack) {
    if (attack->kind == AttackKind::fgsm) return "fgsm(eps=" + fmt(attack->epsilon) + ")";
    return "pgd(eps=" + fmt(attack->epsilon) + ",step=" + fmt(attack->step_size) +
           ",iters=" + std::to_string(attack->max_iters) + ")";
  }
  return o.eta > 0.0 ? "eta=" + fmt(o.eta) : "none";
}

std::string dataset_label(const std::string& selector) { return split(selector, ':').front(); }

TrainConfig train_config(const Options& o, const LossSpec& loss, std::uint64_t fold_seed) {
  TrainConfig cfg;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch;
  cfg.shuffle_seed = derive_seed(fold_seed, 3);
  cfg.init_seed = derive_seed(fold_seed, 4);
  cfg.init = parse_init_scheme(o.init);
  cfg.loss = loss;
  cfg.validate();
  return cfg;
}

struct PreparedSplit {
  Dataset train;
  Dataset test;
  std::optional<Dataset> adv_test;
};

// Applies the configured label noise or adversarial replacement to the
// training part of a split. Attacks use a CCE-trained one-hidden-layer
// surrogate fitted on the clean training part.
PreparedSplit prepare_split(FoldSplit split, const Options& o, const std::optional<AttackConfig>& attack,
                            std::uint64_t fold_seed) {
  PreparedSplit out{std::move(split.train), std::move(split.test), std::nullopt};
  if (o.eta > 0.0) out.train = corrupt_labels(out.train, {o.eta, derive_seed(fold_seed, 1)}).data;
  if (attack) {
    const auto arch = resolve_arch("surrogate-64", out.train.dim, out.train.classes);
    Options surrogate_opts = o;
    if (o.surrogate_epochs > 0) surrogate_opts.epochs = o.surrogate_epochs;
    const auto surrogate = train(out.train, arch, train_config(surrogate_opts, LossSpec::cce(), derive_seed(fold_seed, 2)));
    out.adv_test = adversarial_trainset(surrogate.params, arch, out.test, *attack);
    out.train = adversarial_trainset(surrogate.params, arch, out.train, *attack);
  }
  return out;
}

void validate_common(const Options& o) {
  if (!(o.eta >= 0.0 && o.eta < 1.0)) throw FlagError("--eta must lie in [0, 1)");
  if (o.eta > 0.0 && o.attack != "none") throw FlagError("--eta and --attack cannot be combined");
  if (o.epochs < 1) throw FlagError("--epochs must be >= 1");
  if (o.batch < 1) throw FlagError("--batch must be >= 1");
}

std::vector<LossSpec> losses_from(const Options& o) {
  try {
    return parse_losses(o.loss, o.beta, o.lambda);
  } catch (const std::invalid_argument& e) {
    throw FlagError(e.what());
  }
}

ArchitectureSpec arch_from(const Options& o, const Dataset& data) {
  try {
    return resolve_arch(o.arch, data.dim, data.classes);
  } catch (const std::invalid_argument& e) {
    throw FlagError(e.what());
  }
}

Dataset data_from(const Options& o) {
  try {
    return load_dataset(o.dataset, o.seed, o.limit);
  } catch (const FlagError&) {
    throw;
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
}

std::string params_path(const Options& o) { return o.params_out.empty() ? o.out + ".params.csv" : o.params_out; }

int cmd_train(const Options& o) {
  validate_common(o);
  const auto losses = losses_from(o);
  const auto attack = attack_config(o);
  for (const auto& l : losses) train_config(o, l, 0);
  const Dataset data = data_from(o);
  const auto arch = arch_from(o, data);
  if (o.folds < 2 || o.folds > data.size()) throw FlagError("--folds must lie in [2, n]");

  const auto plan = make_folds(data.size(), o.folds, derive_seed(o.seed, 10));
  const std::string contamination = contamination_label(o, attack);
  std::vector<ResultRecord> records;
  std::vector<double> clean_sum(losses.size(), 0.0), adv_sum(losses.size(), 0.0);

  std::ofstream params_file(params_path(o));
  if (!params_file) throw DataError("cannot open " + params_path(o));
  params_file << "loss,fold,index,value\n";

  for (std::size_t f = 0; f < o.folds; ++f) {
    const std::uint64_t fold_seed = derive_seed(o.seed, 1000 + f);
    const auto prepared = prepare_split(split_fold(data, plan, f), o, attack, fold_seed);
    for (std::size_t li = 0; li < losses.size(); ++li) {
      const auto& loss = losses[li];
      const auto result = train(prepared.train, arch, train_config(o, loss, fold_seed));
      for (double v : result.params.flat)
        if (!std::isfinite(v)) throw NumericError("training diverged for " + loss.name());
      const double clean = accuracy(result.params, arch, prepared.test);
      const double adv = prepared.adv_test ? accuracy(result.params, arch, *prepared.adv_test) : kNaN;
      clean_sum[li] += clean;
      adv_sum[li] += adv;
      const bool is_sd = loss.kind() == LossSpec::Kind::sd;
      records.push_back({dataset_label(o.dataset), loss.name(), is_sd ? loss.tuning().beta() : kNaN,
                         is_sd ? loss.tuning().lambda() : kNaN, contamination, std::to_string(f + 1), clean, adv,
                         o.epochs});
      char buf[40];
      for (std::size_t i = 0; i < result.params.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", result.params.flat[i]);
        params_file << '"' << loss.name() << "\"," << f + 1 << ',' << i << ',' << buf << '\n';
      }
    }
  }
  const double k = static_cast<double>(o.folds);
  for (std::size_t li = 0; li < losses.size(); ++li) {
    const auto& loss = losses[li];
    const bool is_sd = loss.kind() == LossSpec::Kind::sd;
    records.push_back({dataset_label(o.dataset), loss.name(), is_sd ? loss.tuning().beta() : kNaN,
                       is_sd ? loss.tuning().lambda() : kNaN, contamination, "mean", clean_sum[li] / k,
                       attack ? adv_sum[li] / k : kNaN, o.epochs});
    std::cout << loss.name() << ": mean clean accuracy " << fmt(clean_sum[li] / k);
    if (attack) std::cout << ", mean adversarial accuracy " << fmt(adv_sum[li] / k);
    std::cout << '\n';
  }
  write_results(records, o.out);
  return kOk;
}

int cmd_epochs(const Options& o) {
  validate_common(o);
  const auto losses = losses_from(o);
  const auto attack = attack_config(o);
  for (const auto& l : losses) train_config(o, l, 0);
  const Dataset data = data_from(o);
  const auto arch = arch_from(o, data);
  if (o.folds < 2 || o.folds > data.size()) throw FlagError("--folds must lie in [2, n]");

  const auto plan = make_folds(data.size(), o.folds, derive_seed(o.seed, 10));
  const std::uint64_t split_seed = derive_seed(o.seed, 1000);
  const auto prepared = prepare_split(split_fold(data, plan, 0), o, attack, split_seed);

  std::ofstream out(o.out);
  if (!out) throw DataError("cannot open " + o.out);
  out << "loss,beta,lambda,epoch,train_loss,test_accuracy\n";
  for (const auto& loss : losses) {
    const auto result = train(prepared.train, arch, train_config(o, loss, split_seed), {}, &prepared.test);
    const bool is_sd = loss.kind() == LossSpec::Kind::sd;
    for (const auto& m : result.trace)
      out << '"' << loss.name() << "\"," << fmt(is_sd ? loss.tuning().beta() : kNaN) << ','
          << fmt(is_sd ? loss.tuning().lambda() : kNaN) << ',' << m.epoch << ',' << fmt(m.train_loss) << ','
          << fmt(m.test_accuracy) << '\n';
    std::cout << loss.name() << ": final test accuracy " << fmt(result.trace.back().test_accuracy) << '\n';
  }
  if (!out) throw DataError("failed writing " + o.out);
  return kOk;
}

int cmd_corrupt(const Options& o) {
  if (!(o.eta >= 0.0 && o.eta < 1.0)) throw FlagError("--eta must lie in [0, 1)");
  const Dataset data = data_from(o);
  const auto corrupted = corrupt_labels(data, {o.eta, derive_seed(o.seed, 1)});
  write_dataset_csv(corrupted.data, o.out + ".features.csv", o.out + ".labels.csv", corrupted.flip_mask);
  std::size_t flips = 0;
  for (auto m : corrupted.flip_mask) flips += m;
  std::cout << "flipped " << flips << " of " << data.size() << " labels\n";
  return kOk;
}

int cmd_attack(const Options& o) {
  const auto attack = attack_config(o);
  if (!attack) throw FlagError("--attack must be fgsm or pgd");
  if (o.epochs < 1 || o.batch < 1) throw FlagError("--epochs and --batch must be >= 1");
  const Dataset data = data_from(o);
  const auto arch = arch_from(o, data);
  const auto surrogate = train(data, arch, train_config(o, LossSpec::cce(), derive_seed(o.seed, 2)));
  const auto attacked = adversarial_trainset(surrogate.params, arch, data, *attack);
  write_dataset_csv(attacked, o.out + ".features.csv", o.out + ".labels.csv");
  std::cout << "surrogate accuracy clean " << fmt(accuracy(surrogate.params, arch, data)) << ", attacked "
            << fmt(accuracy(surrogate.params, arch, attacked)) << '\n';
  return kOk;
}

struct BoundOptions {
  double eta = 0.2;
  std::size_t classes = 10;
  GridAxis beta{0.0, 1.0, 21};
  GridAxis lambda{-2.0, 2.0, 41};
  std::string out;
};

int cmd_bound(const BoundOptions& b) {
  BoundGrid grid;
  try {
    grid = bound_grid(b.eta, b.classes, b.beta, b.lambda);
  } catch (const std::exception& e) {
    throw FlagError(e.what());
  }
  write_bound_grid(grid, b.out);
  return kOk;
}

struct InfluenceOptions {
  std::string model = "M1";
  double beta = 0.5;
  double lambda = -0.5;
  std::string theta;
  GridAxis x{-10.0, 10.0, 201};
  std::size_t sample_size = 100;
  bool correct = false;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_influence(const InfluenceOptions& io) {
  IFRequest req;
  ArchitectureSpec arch;
  try {
    req.model = parse_example_model(io.model);
    arch = example_model(req.model);
    req.tuning = TuningPair::make(io.beta, io.lambda);
    req.x_grid = io.x.values();
  } catch (const std::invalid_argument& e) {
    throw FlagError(e.what());
  }
  const std::size_t n_params = zero_params(arch).size();
  if (io.theta.empty()) {
    req.theta_g.assign(n_params, 1.0);
  } else {
    for (const auto& s : split(io.theta, ',')) req.theta_g.push_back(to_real(s));
    if (req.theta_g.size() != n_params)
      throw FlagError("--theta needs " + std::to_string(n_params) + " values for " + io.model);
  }
  if (io.sample_size < 1) throw FlagError("--sample-size must be >= 1");
  req.feature_sample = normal_feature_sample(io.sample_size, derive_seed(io.seed, 5));
  if (io.correct) {
    const auto params = make_params(arch, req.theta_g);
    req.p_star = [arch, params](double x) {
      const std::array<double, 1> xs{x};
      return ProbVector(forward(params, arch, xs).probs);
    };
  }
  write_if_curves(influence_function(req), io.out);
  return kOk;
}

// Splices "--key value" pairs from a --config file in front of the explicit
// flags so that the last occurrence, the explicit one, wins.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::vector<std::string> from_file;
  std::size_t insert_at = std::min<std::size_t>(2, args.size());
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      out.push_back(args[i]);
      continue;
    }
    std::ifstream in(path);
    if (!in) throw FlagError("cannot read config file " + path);
    std::string line;
    while (std::getline(in, line)) {
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#' || line[first] == ';') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw FlagError("config line without '=': " + line);
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw FlagError("config line without key: " + line);
      if (value == "true") {
        from_file.push_back("--" + key);
      } else if (value != "false") {
        from_file.push_back("--" + key);
        from_file.push_back(value);
      }
    }
  }
  out.insert(out.begin() + static_cast<std::ptrdiff_t>(insert_at), from_file.begin(), from_file.end());
  return out;
}

void add_grid(CLI::App* cmd, const std::string& name, GridAxis& axis) {
  cmd->add_option("--" + name + "-min", axis.lo)->capture_default_str();
  cmd->add_option("--" + name + "-max", axis.hi)->capture_default_str();
  cmd->add_option("--" + name + "-points", axis.points)->capture_default_str();
}

}  // namespace

ArchitectureSpec resolve_arch(const std::string& preset, std::size_t input_dim, std::size_t classes) {
  ArchitectureSpec arch;
  arch.input_dim = input_dim;
  arch.output_classes = classes;
  if (preset == "mnist-mlp") {
    arch.hidden = {{128, Activation::relu}, {128, Activation::relu}};
  } else if (preset == "fmnist-mlp") {
    arch.hidden = {{200, Activation::relu}, {100, Activation::relu}};
  } else if (preset == "surrogate-64") {
    arch.hidden = {{64, Activation::relu}};
  } else if (preset == "toy") {
    arch.hidden = {{16, Activation::tanh}};
  } else if (preset.rfind("mlp:", 0) == 0) {
    const auto parts = split(preset, ':');
    if (parts.size() != 3) throw std::invalid_argument("custom architecture must read mlp:W1-W2-...:activation");
    const Activation act = parse_activation(parts[2]);
    if (!parts[1].empty())
      for (const auto& w : split(parts[1], '-')) arch.hidden.push_back({to_count(w), act});
  } else {
    throw std::invalid_argument("unknown architecture preset '" + preset + "'");
  }
  arch.validate();
  return arch;
}

std::vector<LossSpec> parse_losses(const std::string& list, double beta, double lambda) {
  std::vector<LossSpec> out;
  for (const auto& token : split(list, ',')) {
    const auto parts = split(token, ':');
    const std::string& kind = parts.front();
    auto arg = [&](std::size_t i) {
      if (parts.size() <= i) throw std::invalid_argument("loss '" + token + "' is missing a parameter");
      return to_real(parts[i]);
    };
    if (kind == "cce" && parts.size() == 1) {
      out.push_back(LossSpec::cce());
    } else if (kind == "mae" && parts.size() == 1) {
      out.push_back(LossSpec::mae());
    } else if (kind == "gce" && parts.size() == 2) {
      out.push_back(LossSpec::gce(arg(1)));
    } else if (kind == "tcce" && parts.size() == 2) {
      out.push_back(LossSpec::tcce(arg(1)));
    } else if (kind == "sd" && parts.size() == 1) {
      out.push_back(LossSpec::sd(TuningPair::make(beta, lambda)));
    } else if (kind == "sd" && parts.size() == 3) {
      out.push_back(LossSpec::sd(TuningPair::make(arg(1), arg(2))));
    } else {
      throw std::invalid_argument("cannot parse loss '" + token + "'");
    }
  }
  if (out.empty()) throw std::invalid_argument("no loss given");
  return out;
}

Dataset load_dataset(const std::string& selector, std::uint64_t seed, std::size_t limit) {
  const auto colon = selector.find(':');
  const std::string kind = selector.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : selector.substr(colon + 1);
  Dataset data;
  if (kind == "blobs") {
    BlobConfig cfg;
    const auto parts = rest.empty() ? std::vector<std::string>{} : split(rest, ':');
    if (parts.size() > 4) throw FlagError("blobs takes at most N:J:DIM:SPREAD");
    if (parts.size() > 0) cfg.n = to_count(parts[0]);
    if (parts.size() > 1) cfg.classes = to_count(parts[1]);
    if (parts.size() > 2) cfg.dim = to_count(parts[2]);
    if (parts.size() > 3) cfg.spread = to_real(parts[3]);
    data = synthetic_blobs(cfg, derive_seed(seed, 20));
  } else if (kind == "example1") {
    data = synthetic_example1(rest.empty() ? 1000 : to_count(rest), derive_seed(seed, 21));
  } else if (kind == "idx" || kind == "csv") {
    const auto paths = split(rest, ',');
    if (paths.size() != 2) throw FlagError(kind + " dataset needs two comma-separated paths");
    data = kind == "idx" ? read_idx(paths[0], paths[1]) : read_dataset_csv(paths[0], paths[1]);
  } else {
    throw FlagError("unknown dataset '" + selector + "'");
  }
  if (limit > 0 && limit < data.size()) {
    std::vector<std::size_t> head(limit);
    for (std::size_t i = 0; i < limit; ++i) head[i] = i;
    data = subset(data, head);
  }
  return data;
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Robust neural classification with S-divergence losses"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Options train_opts, epochs_opts, corrupt_opts, attack_opts;
  BoundOptions bound_opts;
  InfluenceOptions influence_opts;

  auto* train_cmd = app.add_subcommand("train", "k-fold cross-validated training and evaluation");
  add_data_flags(train_cmd, train_opts);
  add_training_flags(train_cmd, train_opts);
  train_cmd->add_option("--params-out", train_opts.params_out, "trained parameters CSV (default OUT.params.csv)");

  auto* epochs_cmd = app.add_subcommand("epochs", "per-epoch test accuracy on a single split");
  add_data_flags(epochs_cmd, epochs_opts);
  add_training_flags(epochs_cmd, epochs_opts);

  auto* corrupt_cmd = app.add_subcommand("corrupt", "inject uniform label noise into a dataset");
  add_data_flags(corrupt_cmd, corrupt_opts);
  corrupt_cmd->add_option("--eta", corrupt_opts.eta, "noise proportion")->required();

  auto* attack_cmd = app.add_subcommand("attack", "replace a dataset by adversarial copies");
  add_data_flags(attack_cmd, attack_opts);
  attack_opts.arch = "surrogate-64";
  attack_opts.attack = "fgsm";
  attack_cmd->add_option("--arch", attack_opts.arch, "surrogate architecture")->capture_default_str();
  attack_cmd->add_option("--attack", attack_opts.attack, "fgsm or pgd")->capture_default_str();
  attack_cmd->add_option("--epsilon", attack_opts.epsilon)->capture_default_str();
  attack_cmd->add_option("--step", attack_opts.step)->capture_default_str();
  attack_cmd->add_option("--iters", attack_opts.iters)->capture_default_str();
  attack_cmd->add_option("--epochs", attack_opts.epochs, "surrogate training epochs")->capture_default_str();
  attack_cmd->add_option("--batch", attack_opts.batch)->capture_default_str();

  auto* bound_cmd = app.add_subcommand("bound", "excess-risk bound over a (beta, lambda) grid");
  bound_cmd->add_option("--eta", bound_opts.eta, "noise proportion")->capture_default_str();
  bound_cmd->add_option("--classes", bound_opts.classes, "number of classes J")->capture_default_str();
  add_grid(bound_cmd, "beta", bound_opts.beta);
  add_grid(bound_cmd, "lambda", bound_opts.lambda);
  bound_cmd->add_option("--out", bound_opts.out)->required();

  auto* influence_cmd = app.add_subcommand("influence", "influence-function curves for the scalar models");
  influence_cmd->add_option("--model", influence_opts.model, "M1, M2 or M3")->capture_default_str();
  influence_cmd->add_option("--beta", influence_opts.beta)->capture_default_str();
  influence_cmd->add_option("--lambda", influence_opts.lambda)->capture_default_str();
  influence_cmd->add_option("--theta", influence_opts.theta, "comma list (default all ones)");
  add_grid(influence_cmd, "x", influence_opts.x);
  influence_cmd->add_option("--sample-size", influence_opts.sample_size)->capture_default_str();
  influence_cmd->add_flag("--correct", influence_opts.correct, "use the model itself as the true posterior");
  influence_cmd->add_option("--seed", influence_opts.seed)->required();
  influence_cmd->add_option("--out", influence_opts.out)->required();

  std::string config_path;
  for (auto* cmd : {train_cmd, epochs_cmd, corrupt_cmd, attack_cmd, bound_cmd, influence_cmd})
    cmd->add_option("--config", config_path, "flat key=value file; command-line flags take precedence");

  std::vector<std::string> expanded;
  try {
    expanded = expand_config(args);
  } catch (const FlagError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadFlags;
  }
  std::vector<std::string> reversed(expanded.rbegin(), expanded.rend() - 1);
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadFlags;
  }

  try {
    if (*train_cmd) return cmd_train(train_opts);
    if (*epochs_cmd) return cmd_epochs(epochs_opts);
    if (*corrupt_cmd) return cmd_corrupt(corrupt_opts);
    if (*attack_cmd) return cmd_attack(attack_opts);
    if (*bound_cmd) return cmd_bound(bound_opts);
    if (*influence_cmd) return cmd_influence(influence_opts);
  } catch (const FlagError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadFlags;
  } catch (const TuningError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadFlags;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kBadData;
  }
  return kBadFlags;
}

}  // namespace rsdnet::cli
