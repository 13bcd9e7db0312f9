#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mstl/dataset.hpp"
#include "mstl/ecoc.hpp"
#include "mstl/network.hpp"

namespace mstl {

// Attribute mode trains the n attribute outputs against the coding matrix;
// Class mode trains the per-class outputs against the one-hot class table.
enum class TrainMode { Attribute, Class };
enum class Decoder { LossBased, Hamming };

struct TrainConfig {
  int iterations = 1000;  // total gradient steps
  int batch = 32;
  double lr = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double delta = 0.05;  // weight of the margin bonus in the loss
  double beta_lo = 5.0;  // smoothing temperature, first half of training
  double beta_hi = 25.0;  // second half
  TrainMode mode = TrainMode::Attribute;
  bool use_margin = true;  // false: plain hinge at zero, no margin terms
  uint64_t seed = 1;
  // After this many epochs without a training-MCR improvement, stop early.
  // 0 keeps the exact iteration count.
  int patience = 0;
  // Independent runs from re-derived seeds; the one whose returned
  // parameters have the lowest binarized training MCR wins. Restarts after
  // one reaches zero are skipped.
  int restarts = 1;
};

struct EpochStats {
  int epoch = 0;
  double loss = 0;          // batch-mean training loss over the epoch
  double mcr = 0;           // training MCR of the binarized model
  double mean_abs_rob = 0;  // mean |output| over correctly classified samples
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  int iterations_run = 0;
  int best_epoch = 0;     // 1-based epoch whose parameters were returned
  double wall_seconds = 0;
  double final_train_mcr = 0;  // training MCR of the returned parameters
  std::vector<std::string> formulae;  // extracted at the end, printed exactly

  std::string to_json_string() const;
  std::string epochs_csv() const;
};

ArchConfig make_arch(const Dataset& data, int attributes, int rows = 3, int templates = 8,
                     PredicateMode mode = PredicateMode::Axis);

// Runs the gradient loop and returns the best epoch's parameter snapshot
// (lowest binarized training MCR, ties broken by lower loss) together with
// the full per-epoch trajectory. With restarts > 1 the loop is repeated
// from re-derived seeds and the best run is returned; the report's
// wall_seconds covers all runs, everything else describes the winner.
std::pair<ModelParams, TrainReport> train(const Dataset& data, const CodingMatrix& code,
                                          const ArchConfig& arch, const TrainConfig& config);

struct EvalReport {
  double mcr_class = 0;      // fraction of samples whose decoded class is wrong
  double mcr_attribute = 0;  // fraction with any attribute bit signed wrong
  std::vector<std::vector<int>> confusion;  // [true][predicted]

  std::string to_json_string() const;
};

// Decodes every sample and tallies errors. In Attribute mode the attribute
// vector is matched against the coding matrix rows; in Class mode the class
// vector is matched against the one-hot table. Labels must fit the coding
// matrix, which may have more rows than the model was trained on.
EvalReport evaluate(const ModelParams& params, const Dataset& data, const CodingMatrix& code,
                    TrainMode mode, double beta, EvalMode eval, Decoder decoder);

struct FoldResult {
  double train_mcr = 0;
  double test_mcr = 0;
  double wall_seconds = 0;
};

struct CrossValResult {
  std::vector<FoldResult> folds;
  double mean_test_mcr = 0;
  std::vector<ModelParams> models;
  std::vector<std::string> formulae;  // from the first fold's model

  std::string to_json_string() const;
};

// Stratified k-fold cross-validation: per class, a seeded shuffle is dealt
// round-robin across folds; fold f tests on its share and trains on the
// rest. Hard-semantics evaluation, loss-based decoding.
CrossValResult crossvalidate(const Dataset& data, const CodingMatrix& code,
                             const ArchConfig& arch, const TrainConfig& config, int folds);

struct AblationPair {
  uint64_t seed = 0;
  double with_margin = 0;     // final-epoch mean_abs_rob, margin loss
  double without_margin = 0;  // same seed and schedule, hinge loss
};

// Paired runs from identical initialization, differing only in the loss.
std::vector<AblationPair> margin_ablation(const Dataset& data, const CodingMatrix& code,
                                          const ArchConfig& arch, const TrainConfig& config,
                                          std::span<const uint64_t> seeds);

}  // namespace mstl
