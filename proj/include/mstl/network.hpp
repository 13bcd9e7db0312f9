#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mstl/autodiff.hpp"
#include "mstl/ecoc.hpp"
#include "mstl/formula.hpp"
#include "mstl/signal.hpp"

namespace mstl {

enum class PredicateMode { Axis, Affine };
enum class TemporalOp { Eventually, Always };

// Shapes of the trainable model: `attributes` formulae are assembled from a
// shared pool of `templates` temporal sub-formulae via per-attribute
// selection matrices with `rows` disjunction rows.
struct ArchConfig {
  int attributes = 1;
  int rows = 3;
  int templates = 8;
  int dims = 1;
  int steps = 1;
  PredicateMode mode = PredicateMode::Axis;
  double mask_gain = 5.0;  // steepness of the soft time-interval mask

  void check() const;
};

// Fixed per-template structure; only thresholds, intervals (and affine
// weights) are learned.
struct TemplateMeta {
  TemporalOp op = TemporalOp::Eventually;
  int axis = -1;  // Axis mode only
  int sign = 0;   // Axis mode: +1 for ">= mu", -1 for "<= mu"
};

// Flat parameter vector plus its layout. Per template: [affine weights,]
// threshold mu, interval ends a1 <= o <= a2 (continuous); then selection
// logits in (attribute, row, template) order.
struct ModelParams {
  ArchConfig arch;
  std::vector<TemplateMeta> meta;
  std::vector<double> theta;
  double beta = 25.0;  // smoothing temperature the parameters were trained at

  int per_template() const { return (arch.mode == PredicateMode::Affine ? arch.dims : 0) + 3; }
  size_t param_count() const {
    return static_cast<size_t>(arch.templates) * per_template() +
           static_cast<size_t>(arch.attributes) * arch.rows * arch.templates;
  }
  size_t weight_index(int m, int k) const { return static_cast<size_t>(m) * per_template() + k; }
  size_t mu_index(int m) const {
    return static_cast<size_t>(m) * per_template() +
           (arch.mode == PredicateMode::Affine ? arch.dims : 0);
  }
  size_t a1_index(int m) const { return mu_index(m) + 1; }
  size_t a2_index(int m) const { return mu_index(m) + 2; }
  size_t logit_index(int a, int i, int m) const {
    return static_cast<size_t>(arch.templates) * per_template() +
           (static_cast<size_t>(a) * arch.rows + i) * arch.templates + m;
  }

  std::string to_json_string() const;
  static ModelParams from_json_string(std::string_view text);
  void save(const std::string& path) const;
  static ModelParams load(const std::string& path);
};

// Seeded initialization. lo/hi give the per-dimension data envelope used to
// place the initial thresholds.
ModelParams init_params(const ArchConfig& arch, uint64_t seed, std::span<const double> lo,
                        std::span<const double> hi);

// Soft time-interval mask at integer offset o (0-based from the signal
// start): sigma(g(o - a1)) * sigma(g(a2 - o)).
double mask_weight(const ModelParams& params, int m, int offset);

// sigma(logit) >= 0.5, i.e. logit >= 0.
bool template_selected(const ModelParams& params, int a, int i, int m);

// Shared per-batch graph nodes: one leaf per parameter plus the mask and
// selection-weight nodes, all reused across the samples of a batch.
struct GraphForward {
  std::vector<ad::Var> leaves;
  std::vector<std::vector<ad::Var>> mask;  // [template][offset]
  std::vector<ad::Var> select;             // sigma(logit), logit order
};

GraphForward begin_batch(ad::Tape& tape, const ModelParams& params);

// Relaxed attribute robustness vector r_a as graph nodes: per template a
// mask-weighted temporal softmax/softmin over the predicate series, then a
// selection-weighted softmin across the pool per row, then a unit-weight
// softmax across rows.
std::vector<ad::Var> attribute_graph(ad::Tape& tape, const GraphForward& shared,
                                     const ModelParams& params, const Signal& s, double beta);

// Relaxed class robustness vector: r_yj = softmin_k { code(j,k) * r_ak }.
std::vector<ad::Var> class_graph(ad::Tape& tape, const GraphForward& shared,
                                 const ModelParams& params, const Signal& s,
                                 const CodingMatrix& code, double beta);

// Numeric evaluation.
//  Relaxed:        same smooth semantics as the training graph.
//  SoftBinarized:  masks and selections snapped to {0,1}, min/max still
//                  smoothed at beta; converges to Hard as beta grows.
//  Hard:           exact min/max over the binarized structure; matches the
//                  extracted formulae bit for bit.
enum class EvalMode { Relaxed, SoftBinarized, Hard };

std::vector<double> attribute_values(const ModelParams& params, const Signal& s, double beta,
                                     EvalMode mode);
std::vector<double> class_values(const ModelParams& params, const Signal& s,
                                 const CodingMatrix& code, double beta, EvalMode mode);

// Binarized network structure: per attribute the surviving rows (template
// indices ascending), plus the discrete interval of every used template.
// Throws if a used template's interval is empty or an attribute has no
// surviving row.
struct BinarizedStructure {
  std::vector<std::vector<std::vector<int>>> rows;   // [attribute][row][template]
  std::vector<std::pair<int, int>> interval;         // [template], valid when used
  std::vector<bool> used;
};

BinarizedStructure binarize(const ModelParams& params);

// One formula per attribute, assembled from the binarized structure.
std::vector<FormulaPtr> extract_formulae(const ModelParams& params);

}  // namespace mstl
