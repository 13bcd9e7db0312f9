#include "mstl/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "mstl/loss.hpp"
#include "mstl/parser.hpp"

namespace mstl {

using nlohmann::json;

ArchConfig make_arch(const Dataset& data, int attributes, int rows, int templates,
                     PredicateMode mode) {
  data.check();
  ArchConfig arch;
  arch.attributes = attributes;
  arch.rows = rows;
  arch.templates = templates;
  arch.dims = data.dims;
  arch.steps = data.steps;
  arch.mode = mode;
  arch.check();
  return arch;
}

namespace {

uint64_t mix_seed(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

struct Adam {
  std::vector<double> m, v;
  int64_t t = 0;

  explicit Adam(size_t n) : m(n, 0.0), v(n, 0.0) {}

  void step(std::vector<double>& theta, std::span<const double> grad, const TrainConfig& c) {
    ++t;
    const double corr1 = 1.0 - std::pow(c.adam_beta1, static_cast<double>(t));
    const double corr2 = 1.0 - std::pow(c.adam_beta2, static_cast<double>(t));
    for (size_t j = 0; j < theta.size(); ++j) {
      m[j] = c.adam_beta1 * m[j] + (1.0 - c.adam_beta1) * grad[j];
      v[j] = c.adam_beta2 * v[j] + (1.0 - c.adam_beta2) * grad[j] * grad[j];
      theta[j] -= c.lr * (m[j] / corr1) / (std::sqrt(v[j] / corr2) + c.adam_eps);
    }
  }
};

// Keeps every soft time window wide enough that at least one discrete
// offset retains mask weight >= 0.5 (half-width 0.6 at gain 5 covers the
// worst integer offset), and keeps its center inside the offset range.
// Euclidean projection after each optimizer step; deselecting a template is
// the job of the row logits, not of collapsing its window.
void project_windows(ModelParams& params) {
  constexpr double kHalfWidth = 0.6;
  for (int m = 0; m < params.arch.templates; ++m) {
    double& a1 = params.theta[params.a1_index(m)];
    double& a2 = params.theta[params.a2_index(m)];
    if (a2 - a1 < 2 * kHalfWidth) {
      const double c = 0.5 * (a1 + a2);
      a1 = c - kHalfWidth;
      a2 = c + kHalfWidth;
    }
    const double c = 0.5 * (a1 + a2);
    const double shift =
        std::clamp(c, 0.0, static_cast<double>(params.arch.steps - 1)) - c;
    a1 += shift;
    a2 += shift;
  }
}

void data_envelope(const Dataset& data, std::vector<double>& lo, std::vector<double>& hi) {
  lo.assign(data.dims, std::numeric_limits<double>::infinity());
  hi.assign(data.dims, -std::numeric_limits<double>::infinity());
  for (const Signal& s : data.signals)
    for (int tau = 1; tau <= s.steps(); ++tau)
      for (int k = 0; k < s.dim(); ++k) {
        lo[k] = std::min(lo[k], s.at(tau, k));
        hi[k] = std::max(hi[k], s.at(tau, k));
      }
}

// Relaxed output vector for one sample under the training objective's view:
// attributes for Attribute mode, class decoders for Class mode.
std::vector<double> relaxed_outputs(const ModelParams& params, const Signal& s,
                                    const CodingMatrix& code, TrainMode mode, double beta) {
  return mode == TrainMode::Attribute
             ? attribute_values(params, s, beta, EvalMode::Relaxed)
             : class_values(params, s, code, beta, EvalMode::Relaxed);
}

struct EpochEval {
  double hard_mcr = 1.0;
  double mean_abs_rob = 0;
};

// Scores the epoch's parameters by what they deliver: the misclassification
// rate of the binarized model. Parameters whose binarization is degenerate
// (an attribute selects no templates) score 1.0. Robustness magnitude is
// averaged over the relaxed outputs of correctly classified samples, since
// that is the quantity the margin terms push on.
EpochEval epoch_eval(const ModelParams& params, const Dataset& data, const CodingMatrix& code,
                     const CodingMatrix& loss_code, TrainMode mode, double beta) {
  EpochEval e;
  int correct = 0;
  double rob_sum = 0;
  for (size_t i = 0; i < data.size(); ++i) {
    const std::vector<double> out = relaxed_outputs(params, data.signals[i], code, mode, beta);
    if (decode_loss_based(loss_code, out) != data.labels[i]) continue;
    ++correct;
    double acc = 0;
    for (const double r : out) acc += std::abs(r);
    rob_sum += acc / static_cast<double>(out.size());
  }
  e.mean_abs_rob = correct ? rob_sum / correct : 0.0;

  try {
    int wrong = 0;
    for (size_t i = 0; i < data.size(); ++i) {
      const std::vector<double> out =
          mode == TrainMode::Attribute
              ? attribute_values(params, data.signals[i], beta, EvalMode::Hard)
              : class_values(params, data.signals[i], code, beta, EvalMode::Hard);
      if (decode_loss_based(loss_code, out) != data.labels[i]) ++wrong;
    }
    e.hard_mcr = static_cast<double>(wrong) / static_cast<double>(data.size());
  } catch (const std::runtime_error&) {
    e.hard_mcr = 1.0;
  }
  return e;
}

std::pair<ModelParams, TrainReport> train_once(const Dataset& data, const CodingMatrix& code,
                                               const ArchConfig& arch,
                                               const TrainConfig& config) {
  data.check();
  arch.check();
  if (data.signals.empty()) throw std::invalid_argument("train: empty dataset");
  if (arch.dims != data.dims || arch.steps != data.steps)
    throw std::invalid_argument("train: architecture shape does not match dataset");
  if (code.attributes() != arch.attributes)
    throw std::invalid_argument("train: coding matrix does not match attribute count");
  if (code.classes() != data.classes)
    throw std::invalid_argument("train: coding matrix does not match class count");
  if (config.iterations < 1 || config.batch < 1)
    throw std::invalid_argument("train: iterations and batch must be >= 1");

  const auto t0 = std::chrono::steady_clock::now();

  std::vector<double> lo, hi;
  data_envelope(data, lo, hi);
  ModelParams params = init_params(arch, config.seed, lo, hi);

  // In Class mode the loss compares class outputs against the one-hot
  // table; the coding matrix shapes the outputs themselves.
  const CodingMatrix one_hot = CodingMatrix::one_hot(data.classes);
  const CodingMatrix& loss_code = config.mode == TrainMode::Attribute ? code : one_hot;

  const int n = static_cast<int>(data.size());
  const int batch = std::min(config.batch, n);
  const int iters_per_epoch = (n + batch - 1) / batch;

  std::mt19937_64 shuffle_rng(mix_seed(config.seed));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  Adam adam(params.theta.size());
  std::vector<double> grad(params.theta.size());
  TrainReport report;

  double epoch_loss_sum = 0;
  int epoch_batches = 0;
  double best_mcr = std::numeric_limits<double>::infinity();
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<double> best_theta = params.theta;
  double best_beta = config.beta_lo;
  int best_epoch = 0;
  int epochs_since_best = 0;

  ad::Tape tape;
  std::vector<std::vector<ad::Var>> rob;
  std::vector<int> batch_labels;

  int iter = 0;
  for (; iter < config.iterations; ++iter) {
    const double beta = iter < config.iterations / 2 ? config.beta_lo : config.beta_hi;
    const int slot = iter % iters_per_epoch;
    if (slot == 0) std::shuffle(order.begin(), order.end(), shuffle_rng);

    const int begin = slot * batch;
    const int end = std::min(begin + batch, n);

    tape.clear();
    const GraphForward shared = begin_batch(tape, params);
    rob.clear();
    batch_labels.clear();
    for (int b = begin; b < end; ++b) {
      const int i = order[b];
      rob.push_back(config.mode == TrainMode::Attribute
                        ? attribute_graph(tape, shared, params, data.signals[i], beta)
                        : class_graph(tape, shared, params, data.signals[i], code, beta));
      batch_labels.push_back(data.labels[i]);
    }

    ad::Var loss;
    if (config.use_margin) {
      loss = margin_loss(tape, loss_code, batch_labels, rob, config.delta);
    } else {
      loss = hinge_loss(tape, loss_code, batch_labels, rob);
    }
    if (!std::isfinite(loss.value()))
      throw std::runtime_error("train: loss diverged at iteration " + std::to_string(iter + 1));

    tape.backward(loss);
    for (size_t j = 0; j < grad.size(); ++j) grad[j] = shared.leaves[j].grad();
    adam.step(params.theta, grad, config);
    project_windows(params);
    for (const double p : params.theta)
      if (!std::isfinite(p) || std::abs(p) > 1e6)
        throw std::runtime_error("train: parameters diverged at iteration " +
                                 std::to_string(iter + 1));

    epoch_loss_sum += loss.value();
    ++epoch_batches;

    if (slot == iters_per_epoch - 1 || iter == config.iterations - 1) {
      const EpochEval ev = epoch_eval(params, data, code, loss_code, config.mode, beta);
      EpochStats st;
      st.epoch = static_cast<int>(report.epochs.size()) + 1;
      st.loss = epoch_loss_sum / epoch_batches;
      st.mcr = ev.hard_mcr;
      st.mean_abs_rob = ev.mean_abs_rob;
      report.epochs.push_back(st);
      epoch_loss_sum = 0;
      epoch_batches = 0;

      // Margin pursuit can destabilize a converged model late in training,
      // and early relaxed progress can hide parameters that binarize badly,
      // so the returned parameters are the epoch snapshot with the lowest
      // binarized training MCR, ties broken by lower loss (larger margins).
      const bool improved_mcr = ev.hard_mcr < best_mcr;
      if (improved_mcr || (ev.hard_mcr == best_mcr && st.loss < best_loss)) {
        best_loss = st.loss;
        best_theta = params.theta;
        best_beta = beta;
        best_epoch = st.epoch;
      }
      if (improved_mcr) {
        best_mcr = ev.hard_mcr;
        epochs_since_best = 0;
      } else if (config.patience > 0 && ++epochs_since_best >= config.patience) {
        ++iter;
        break;
      }
    }
  }

  report.iterations_run = iter;
  params.theta = std::move(best_theta);
  params.beta = best_beta;
  report.best_epoch = best_epoch;
  report.final_train_mcr = std::isfinite(best_mcr) ? best_mcr : 1.0;
  for (const FormulaPtr& f : extract_formulae(params))
    report.formulae.push_back(print_formula(*f, -1));
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(params), std::move(report)};
}

}  // namespace

std::pair<ModelParams, TrainReport> train(const Dataset& data, const CodingMatrix& code,
                                          const ArchConfig& arch, const TrainConfig& config) {
  if (config.restarts < 1) throw std::invalid_argument("train: restarts must be >= 1");

  // The gradient loop lands in a poor local optimum for some seeds, so the
  // model delivered is the best of a few independent runs, judged by the
  // same binarized training MCR the epoch snapshots use. Restart 0 runs the
  // configured seed itself, keeping single-restart behavior unchanged.
  std::pair<ModelParams, TrainReport> best;
  double total_seconds = 0;
  for (int r = 0; r < config.restarts; ++r) {
    TrainConfig run_config = config;
    if (r > 0) run_config.seed = mix_seed(config.seed + 0x7E57A600ull * static_cast<uint64_t>(r));
    std::pair<ModelParams, TrainReport> run = train_once(data, code, arch, run_config);
    total_seconds += run.second.wall_seconds;
    if (r == 0 || run.second.final_train_mcr < best.second.final_train_mcr)
      best = std::move(run);
    if (best.second.final_train_mcr == 0.0) break;
  }
  best.second.wall_seconds = total_seconds;
  return best;
}

EvalReport evaluate(const ModelParams& params, const Dataset& data, const CodingMatrix& code,
                    TrainMode mode, double beta, EvalMode eval, Decoder decoder) {
  data.check();
  if (data.signals.empty()) throw std::invalid_argument("evaluate: empty dataset");
  if (code.classes() < data.classes)
    throw std::invalid_argument("evaluate: coding matrix has fewer rows than classes");

  const CodingMatrix one_hot = CodingMatrix::one_hot(code.classes());
  EvalReport rep;
  rep.confusion.assign(code.classes(), std::vector<int>(code.classes(), 0));
  int wrong = 0, attr_wrong = 0;
  for (size_t i = 0; i < data.size(); ++i) {
    const std::vector<double> attrs = attribute_values(params, data.signals[i], beta, eval);

    std::vector<double> out;
    const CodingMatrix* decode_code = nullptr;
    if (mode == TrainMode::Attribute) {
      out = attrs;
      decode_code = &code;
    } else {
      out = class_values(params, data.signals[i], code, beta, eval);
      decode_code = &one_hot;
    }
    const int pred = decoder == Decoder::LossBased ? decode_loss_based(*decode_code, out)
                                                   : decode_hamming(*decode_code, out);
    ++rep.confusion[data.labels[i]][pred];
    if (pred != data.labels[i]) ++wrong;

    bool any_bit_wrong = false;
    for (int k = 0; k < code.attributes(); ++k) {
      const int sign = attrs[k] > 0 ? 1 : -1;
      if (sign != code.entry(data.labels[i], k)) any_bit_wrong = true;
    }
    if (any_bit_wrong) ++attr_wrong;
  }
  rep.mcr_class = static_cast<double>(wrong) / static_cast<double>(data.size());
  rep.mcr_attribute = static_cast<double>(attr_wrong) / static_cast<double>(data.size());
  return rep;
}

CrossValResult crossvalidate(const Dataset& data, const CodingMatrix& code,
                             const ArchConfig& arch, const TrainConfig& config, int folds) {
  data.check();
  if (folds < 2) throw std::invalid_argument("crossvalidate: needs at least 2 folds");

  // Stratified deal: per class, shuffle then hand out round-robin.
  std::vector<int> fold_of(data.size(), -1);
  std::mt19937_64 rng(mix_seed(config.seed ^ 0xF01Dull));
  for (int cls = 0; cls < data.classes; ++cls) {
    std::vector<int> members;
    for (size_t i = 0; i < data.size(); ++i)
      if (data.labels[i] == cls) members.push_back(static_cast<int>(i));
    std::shuffle(members.begin(), members.end(), rng);
    for (size_t j = 0; j < members.size(); ++j)
      fold_of[members[j]] = static_cast<int>(j % folds);
  }

  CrossValResult result;
  for (int f = 0; f < folds; ++f) {
    Dataset train_set, test_set;
    train_set.classes = test_set.classes = data.classes;
    train_set.steps = test_set.steps = data.steps;
    train_set.dims = test_set.dims = data.dims;
    for (size_t i = 0; i < data.size(); ++i) {
      Dataset& dst = fold_of[i] == f ? test_set : train_set;
      dst.signals.push_back(data.signals[i]);
      dst.labels.push_back(data.labels[i]);
    }
    if (test_set.signals.empty() || train_set.signals.empty())
      throw std::invalid_argument("crossvalidate: a fold is empty; too many folds");

    TrainConfig fold_config = config;
    fold_config.seed = config.seed + static_cast<uint64_t>(f);
    auto [model, rep] = train(train_set, code, arch, fold_config);

    FoldResult fr;
    fr.wall_seconds = rep.wall_seconds;
    fr.train_mcr = evaluate(model, train_set, code, config.mode, config.beta_hi, EvalMode::Hard,
                            Decoder::LossBased)
                       .mcr_class;
    fr.test_mcr = evaluate(model, test_set, code, config.mode, config.beta_hi, EvalMode::Hard,
                           Decoder::LossBased)
                      .mcr_class;
    result.folds.push_back(fr);
    if (f == 0) result.formulae = rep.formulae;
    result.models.push_back(std::move(model));
  }
  double sum = 0;
  for (const FoldResult& fr : result.folds) sum += fr.test_mcr;
  result.mean_test_mcr = sum / static_cast<double>(result.folds.size());
  return result;
}

std::vector<AblationPair> margin_ablation(const Dataset& data, const CodingMatrix& code,
                                          const ArchConfig& arch, const TrainConfig& config,
                                          std::span<const uint64_t> seeds) {
  std::vector<AblationPair> out;
  for (const uint64_t seed : seeds) {
    TrainConfig with = config;
    with.seed = seed;
    with.use_margin = true;
    with.patience = 0;
    with.restarts = 1;  // paired runs must share one initialization
    TrainConfig without = with;
    without.use_margin = false;

    // Final-epoch robustness magnitude: the quantity the margin terms keep
    // pushing after the error rate settles, read where the push ends.
    const auto final_rob = [&](const TrainConfig& c) {
      return train(data, code, arch, c).second.epochs.back().mean_abs_rob;
    };
    AblationPair pair;
    pair.seed = seed;
    pair.with_margin = final_rob(with);
    pair.without_margin = final_rob(without);
    out.push_back(pair);
  }
  return out;
}

std::string TrainReport::to_json_string() const {
  json j;
  j["iterations_run"] = iterations_run;
  j["best_epoch"] = best_epoch;
  j["wall_seconds"] = wall_seconds;
  j["final_train_mcr"] = final_train_mcr;
  j["formulae"] = formulae;
  auto arr = json::array();
  for (const EpochStats& e : epochs)
    arr.push_back({{"epoch", e.epoch},
                   {"loss", e.loss},
                   {"mcr", e.mcr},
                   {"mean_abs_rob", e.mean_abs_rob}});
  j["epochs"] = std::move(arr);
  return j.dump(2);
}

std::string TrainReport::epochs_csv() const {
  std::ostringstream out;
  out << "epoch,loss,mcr,mean_abs_rob\n";
  for (const EpochStats& e : epochs)
    out << e.epoch << ',' << e.loss << ',' << e.mcr << ',' << e.mean_abs_rob << '\n';
  return out.str();
}

std::string EvalReport::to_json_string() const {
  json j;
  j["mcr_class"] = mcr_class;
  j["mcr_attribute"] = mcr_attribute;
  j["confusion"] = confusion;
  return j.dump(2);
}

std::string CrossValResult::to_json_string() const {
  json j;
  auto arr = json::array();
  for (const FoldResult& f : folds)
    arr.push_back({{"train_mcr", f.train_mcr},
                   {"test_mcr", f.test_mcr},
                   {"wall_seconds", f.wall_seconds}});
  j["folds"] = std::move(arr);
  j["mean_test_mcr"] = mean_test_mcr;
  j["formulae"] = formulae;
  return j.dump(2);
}

}  // namespace mstl
