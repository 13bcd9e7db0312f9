#include "mstl/network.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mstl {

using nlohmann::json;

void ArchConfig::check() const {
  if (attributes < 1 || rows < 1 || templates < 1 || dims < 1 || steps < 1)
    throw std::invalid_argument("architecture: all shape fields must be >= 1");
  if (!(mask_gain > 0)) throw std::invalid_argument("architecture: mask gain must be positive");
}

// Draw order per template: [affine weights,] threshold, interval midpoint,
// interval half-width; then all selection logits. Keeping this order fixed
// makes initialization reproducible from the seed alone.
ModelParams init_params(const ArchConfig& arch, uint64_t seed, std::span<const double> lo,
                        std::span<const double> hi) {
  arch.check();
  if (lo.size() != static_cast<size_t>(arch.dims) || hi.size() != lo.size())
    throw std::invalid_argument("init_params: lo/hi must have one entry per dimension");
  for (size_t k = 0; k < lo.size(); ++k)
    if (lo[k] > hi[k]) throw std::invalid_argument("init_params: lo > hi");

  ModelParams p;
  p.arch = arch;
  p.meta.resize(arch.templates);
  if (arch.mode == PredicateMode::Axis) {
    std::vector<TemplateMeta> combos;
    for (const TemporalOp op : {TemporalOp::Eventually, TemporalOp::Always})
      for (int axis = 0; axis < arch.dims; ++axis)
        for (const int sign : {1, -1}) combos.push_back({op, axis, sign});
    for (int m = 0; m < arch.templates; ++m) p.meta[m] = combos[m % combos.size()];
  } else {
    for (int m = 0; m < arch.templates; ++m)
      p.meta[m] = {m < (arch.templates + 1) / 2 ? TemporalOp::Eventually : TemporalOp::Always,
                   -1, 0};
  }

  p.theta.resize(p.param_count());
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
  };

  double envelope = 0.0;
  for (size_t k = 0; k < lo.size(); ++k)
    envelope = std::max({envelope, std::abs(lo[k]), std::abs(hi[k])});

  const double span = arch.steps - 1;
  for (int m = 0; m < arch.templates; ++m) {
    if (arch.mode == PredicateMode::Affine)
      for (int k = 0; k < arch.dims; ++k) p.theta[p.weight_index(m, k)] = uniform(-1.0, 1.0);
    p.theta[p.mu_index(m)] = arch.mode == PredicateMode::Axis
                                 ? uniform(lo[p.meta[m].axis], hi[p.meta[m].axis])
                                 : uniform(-envelope, envelope);
    const double mid = uniform(0.15, 0.85) * span;
    // A half-width below ~0.6 can leave no integer offset with mask >= 0.5.
    const double half = std::max(0.6, uniform(0.1, 0.35) * span);
    p.theta[p.a1_index(m)] = mid - half;
    p.theta[p.a2_index(m)] = mid + half;
  }
  for (int a = 0; a < arch.attributes; ++a)
    for (int i = 0; i < arch.rows; ++i)
      for (int m = 0; m < arch.templates; ++m)
        p.theta[p.logit_index(a, i, m)] = uniform(-0.5, 0.5);
  return p;
}

double mask_weight(const ModelParams& params, int m, int offset) {
  const double g = params.arch.mask_gain;
  const double a1 = params.theta[params.a1_index(m)];
  const double a2 = params.theta[params.a2_index(m)];
  return ad::sigmoid(g * (offset - a1)) * ad::sigmoid(g * (a2 - offset));
}

bool template_selected(const ModelParams& params, int a, int i, int m) {
  return params.theta[params.logit_index(a, i, m)] >= 0.0;
}

GraphForward begin_batch(ad::Tape& tape, const ModelParams& params) {
  params.arch.check();
  if (params.theta.size() != params.param_count())
    throw std::invalid_argument("parameter vector does not match architecture");

  GraphForward g;
  g.leaves.resize(params.theta.size());
  for (size_t j = 0; j < params.theta.size(); ++j) g.leaves[j] = tape.leaf(params.theta[j]);

  const double gain = params.arch.mask_gain;
  g.mask.resize(params.arch.templates);
  for (int m = 0; m < params.arch.templates; ++m) {
    const ad::Var a1 = g.leaves[params.a1_index(m)];
    const ad::Var a2 = g.leaves[params.a2_index(m)];
    const ad::Var neg_a1 = tape.neg(a1);
    g.mask[m].resize(params.arch.steps);
    for (int o = 0; o < params.arch.steps; ++o) {
      const ad::Var left = tape.sigmoid(tape.scale(tape.add_const(neg_a1, o), gain));
      const ad::Var right = tape.sigmoid(tape.scale(tape.add_const(a2, -o), gain));
      g.mask[m][o] = tape.mul(left, right);
    }
  }

  const size_t logit_base = params.logit_index(0, 0, 0);
  const size_t n_logits = params.theta.size() - logit_base;
  g.select.resize(n_logits);
  for (size_t j = 0; j < n_logits; ++j)
    g.select[j] = tape.sigmoid(g.leaves[logit_base + j]);
  return g;
}

namespace {

void check_signal(const ModelParams& params, const Signal& s) {
  if (s.steps() != params.arch.steps || s.dim() != params.arch.dims)
    throw std::invalid_argument("signal shape does not match architecture");
}

}  // namespace

std::vector<ad::Var> attribute_graph(ad::Tape& tape, const GraphForward& shared,
                                     const ModelParams& params, const Signal& s, double beta) {
  check_signal(params, s);
  const ArchConfig& arch = params.arch;

  // Pool values are shared by every attribute of this sample.
  std::vector<ad::Var> pool(arch.templates);
  std::vector<ad::Var> preds(arch.steps);
  for (int m = 0; m < arch.templates; ++m) {
    const TemplateMeta& meta = params.meta[m];
    const ad::Var mu = shared.leaves[params.mu_index(m)];
    if (arch.mode == PredicateMode::Axis) {
      if (meta.sign > 0) {
        const ad::Var neg_mu = tape.neg(mu);
        for (int o = 0; o < arch.steps; ++o)
          preds[o] = tape.add_const(neg_mu, s.at(o + 1, meta.axis));
      } else {
        for (int o = 0; o < arch.steps; ++o)
          preds[o] = tape.add_const(mu, -s.at(o + 1, meta.axis));
      }
    } else {
      const ad::Var neg_mu = tape.neg(mu);
      for (int o = 0; o < arch.steps; ++o) {
        ad::Var acc = neg_mu;
        for (int k = 0; k < arch.dims; ++k)
          acc = tape.add(acc, tape.scale(shared.leaves[params.weight_index(m, k)],
                                         s.at(o + 1, k)));
        preds[o] = acc;
      }
    }
    pool[m] = meta.op == TemporalOp::Eventually ? tape.softmax(preds, shared.mask[m], beta)
                                                : tape.softmin(preds, shared.mask[m], beta);
  }

  std::vector<ad::Var> out(arch.attributes);
  std::vector<ad::Var> row_vals(arch.rows);
  const size_t logit_base = params.logit_index(0, 0, 0);
  for (int a = 0; a < arch.attributes; ++a) {
    for (int i = 0; i < arch.rows; ++i) {
      const size_t first = params.logit_index(a, i, 0) - logit_base;
      const std::span<const ad::Var> weights(shared.select.data() + first,
                                             static_cast<size_t>(arch.templates));
      row_vals[i] = tape.softmin(pool, weights, beta);
    }
    out[a] = tape.softmax(row_vals, beta);
  }
  return out;
}

std::vector<ad::Var> class_graph(ad::Tape& tape, const GraphForward& shared,
                                 const ModelParams& params, const Signal& s,
                                 const CodingMatrix& code, double beta) {
  if (code.attributes() != params.arch.attributes)
    throw std::invalid_argument("coding matrix does not match attribute count");
  const std::vector<ad::Var> attrs = attribute_graph(tape, shared, params, s, beta);
  std::vector<ad::Var> out(code.classes());
  std::vector<ad::Var> signed_vals(code.attributes());
  for (int j = 0; j < code.classes(); ++j) {
    for (int k = 0; k < code.attributes(); ++k)
      signed_vals[k] = tape.scale(attrs[k], code.entry(j, k));
    out[j] = tape.softmin(std::span<const ad::Var>(signed_vals), beta);
  }
  return out;
}

namespace {

// Mirrors the exact predicate arithmetic used when evaluating an extracted
// formula, so hard evaluation and the formula agree bit for bit.
double hard_predicate(const ModelParams& params, int m, const Signal& s, int tau) {
  const TemplateMeta& meta = params.meta[m];
  const double mu = params.theta[params.mu_index(m)];
  if (params.arch.mode == PredicateMode::Axis) {
    const double x = s.at(tau, meta.axis);
    return meta.sign > 0 ? x - mu : mu - x;
  }
  double v = 0.0;
  for (int k = 0; k < params.arch.dims; ++k)
    v += params.theta[params.weight_index(m, k)] * s.at(tau, k);
  return v - mu;
}

std::vector<double> relaxed_attribute_values(const ModelParams& params, const Signal& s,
                                             double beta) {
  const ArchConfig& arch = params.arch;
  std::vector<double> pool(arch.templates);
  std::vector<double> preds(arch.steps), mask(arch.steps);
  for (int m = 0; m < arch.templates; ++m) {
    for (int o = 0; o < arch.steps; ++o) {
      preds[o] = hard_predicate(params, m, s, o + 1);
      mask[o] = mask_weight(params, m, o);
    }
    pool[m] = params.meta[m].op == TemporalOp::Eventually
                  ? ad::softmax_value(preds, mask, beta)
                  : ad::softmin_value(preds, mask, beta);
  }

  std::vector<double> out(arch.attributes);
  std::vector<double> row_vals(arch.rows), select(arch.templates);
  for (int a = 0; a < arch.attributes; ++a) {
    for (int i = 0; i < arch.rows; ++i) {
      for (int m = 0; m < arch.templates; ++m)
        select[m] = ad::sigmoid(params.theta[params.logit_index(a, i, m)]);
      row_vals[i] = ad::softmin_value(pool, select, beta);
    }
    out[a] = ad::softmax_value(row_vals, beta);
  }
  return out;
}

// Hard or beta-smoothed evaluation over the binarized structure. The hard
// path folds min/max in ascending index order, matching the evaluation of
// the extracted formulae.
std::vector<double> binarized_attribute_values(const ModelParams& params, const Signal& s,
                                               double beta, bool hard) {
  const ArchConfig& arch = params.arch;
  const BinarizedStructure bs = binarize(params);

  std::vector<double> pool(arch.templates, 0.0);
  std::vector<double> preds;
  for (int m = 0; m < arch.templates; ++m) {
    if (!bs.used[m]) continue;
    const auto [t1, t2] = bs.interval[m];
    const bool ev = params.meta[m].op == TemporalOp::Eventually;
    if (hard) {
      double r = hard_predicate(params, m, s, t1 + 1);
      for (int o = t1 + 1; o <= t2; ++o) {
        const double c = hard_predicate(params, m, s, o + 1);
        r = ev ? std::max(r, c) : std::min(r, c);
      }
      pool[m] = r;
    } else {
      preds.resize(t2 - t1 + 1);
      for (int o = t1; o <= t2; ++o) preds[o - t1] = hard_predicate(params, m, s, o + 1);
      pool[m] = ev ? ad::softmax_value(preds, beta) : ad::softmin_value(preds, beta);
    }
  }

  std::vector<double> out(arch.attributes);
  std::vector<double> row_vals, terms;
  for (int a = 0; a < arch.attributes; ++a) {
    row_vals.clear();
    for (const std::vector<int>& row : bs.rows[a]) {
      if (hard) {
        double r = pool[row[0]];
        for (size_t j = 1; j < row.size(); ++j) r = std::min(r, pool[row[j]]);
        row_vals.push_back(r);
      } else {
        terms.clear();
        for (const int m : row) terms.push_back(pool[m]);
        row_vals.push_back(ad::softmin_value(terms, beta));
      }
    }
    if (hard) {
      double r = row_vals[0];
      for (size_t i = 1; i < row_vals.size(); ++i) r = std::max(r, row_vals[i]);
      out[a] = r;
    } else {
      out[a] = ad::softmax_value(row_vals, beta);
    }
  }
  return out;
}

}  // namespace

std::vector<double> attribute_values(const ModelParams& params, const Signal& s, double beta,
                                     EvalMode mode) {
  check_signal(params, s);
  if (params.theta.size() != params.param_count())
    throw std::invalid_argument("parameter vector does not match architecture");
  switch (mode) {
    case EvalMode::Relaxed:
      return relaxed_attribute_values(params, s, beta);
    case EvalMode::SoftBinarized:
      return binarized_attribute_values(params, s, beta, false);
    case EvalMode::Hard:
      return binarized_attribute_values(params, s, beta, true);
  }
  throw std::logic_error("attribute_values: unknown mode");
}

std::vector<double> class_values(const ModelParams& params, const Signal& s,
                                 const CodingMatrix& code, double beta, EvalMode mode) {
  if (code.attributes() != params.arch.attributes)
    throw std::invalid_argument("coding matrix does not match attribute count");
  const std::vector<double> attrs = attribute_values(params, s, beta, mode);
  std::vector<double> out(code.classes());
  std::vector<double> signed_vals(code.attributes());
  for (int j = 0; j < code.classes(); ++j) {
    if (mode == EvalMode::Hard) {
      double r = code.entry(j, 0) * attrs[0];
      for (int k = 1; k < code.attributes(); ++k)
        r = std::min(r, code.entry(j, k) * attrs[k]);
      out[j] = r;
    } else {
      for (int k = 0; k < code.attributes(); ++k)
        signed_vals[k] = code.entry(j, k) * attrs[k];
      out[j] = ad::softmin_value(signed_vals, beta);
    }
  }
  return out;
}

BinarizedStructure binarize(const ModelParams& params) {
  params.arch.check();
  if (params.theta.size() != params.param_count())
    throw std::invalid_argument("parameter vector does not match architecture");
  const ArchConfig& arch = params.arch;

  BinarizedStructure bs;
  bs.rows.resize(arch.attributes);
  bs.used.assign(arch.templates, false);
  for (int a = 0; a < arch.attributes; ++a) {
    for (int i = 0; i < arch.rows; ++i) {
      std::vector<int> row;
      for (int m = 0; m < arch.templates; ++m)
        if (template_selected(params, a, i, m)) row.push_back(m);
      if (row.empty()) continue;
      for (const int m : row) bs.used[m] = true;
      bs.rows[a].push_back(std::move(row));
    }
    if (bs.rows[a].empty())
      throw std::runtime_error("attribute " + std::to_string(a + 1) +
                               " selects no templates after binarization");
  }

  bs.interval.assign(arch.templates, {0, -1});
  for (int m = 0; m < arch.templates; ++m) {
    if (!bs.used[m]) continue;
    int t1 = -1, t2 = -1;
    for (int o = 0; o < arch.steps; ++o) {
      if (mask_weight(params, m, o) < 0.5) continue;
      if (t1 < 0) t1 = o;
      t2 = o;
    }
    if (t1 < 0)
      throw std::runtime_error("template " + std::to_string(m + 1) +
                               " has an empty time interval at extraction");
    bs.interval[m] = {t1, t2};
  }
  return bs;
}

std::vector<FormulaPtr> extract_formulae(const ModelParams& params) {
  const BinarizedStructure bs = binarize(params);
  const ArchConfig& arch = params.arch;

  std::vector<FormulaPtr> concrete(arch.templates);
  for (int m = 0; m < arch.templates; ++m) {
    if (!bs.used[m]) continue;
    const TemplateMeta& meta = params.meta[m];
    const double mu = params.theta[params.mu_index(m)];
    FormulaPtr pred;
    if (arch.mode == PredicateMode::Axis) {
      pred = Formula::axis_predicate(meta.axis, meta.sign > 0 ? Cmp::Ge : Cmp::Le, mu);
    } else {
      std::vector<double> w(arch.dims);
      for (int k = 0; k < arch.dims; ++k) w[k] = params.theta[params.weight_index(m, k)];
      pred = Formula::predicate(std::move(w), mu, Cmp::Ge);
    }
    const Interval window{bs.interval[m].first, bs.interval[m].second};
    concrete[m] = meta.op == TemporalOp::Eventually ? Formula::eventually(window, pred)
                                                    : Formula::always(window, pred);
  }

  std::vector<FormulaPtr> out(arch.attributes);
  for (int a = 0; a < arch.attributes; ++a) {
    std::vector<FormulaPtr> rows;
    for (const std::vector<int>& row : bs.rows[a]) {
      std::vector<FormulaPtr> terms;
      for (const int m : row) terms.push_back(concrete[m]);
      rows.push_back(terms.size() == 1 ? terms[0] : Formula::conj(std::move(terms)));
    }
    out[a] = rows.size() == 1 ? rows[0] : Formula::disj(std::move(rows));
  }
  return out;
}

namespace {

std::string mode_name(PredicateMode m) { return m == PredicateMode::Axis ? "axis" : "affine"; }
PredicateMode mode_from(const std::string& s) {
  if (s == "axis") return PredicateMode::Axis;
  if (s == "affine") return PredicateMode::Affine;
  throw std::invalid_argument("unknown predicate mode: " + s);
}

}  // namespace

std::string ModelParams::to_json_string() const {
  json j;
  j["schema"] = "mstl-model/v1";
  j["arch"] = {{"attributes", arch.attributes}, {"rows", arch.rows},
               {"templates", arch.templates},  {"dims", arch.dims},
               {"steps", arch.steps},          {"mode", mode_name(arch.mode)},
               {"mask_gain", arch.mask_gain}};
  auto meta_arr = json::array();
  for (const TemplateMeta& m : meta)
    meta_arr.push_back({{"op", m.op == TemporalOp::Eventually ? "F" : "G"},
                        {"axis", m.axis},
                        {"sign", m.sign}});
  j["meta"] = std::move(meta_arr);
  j["theta"] = theta;
  j["beta"] = beta;
  return j.dump(2);
}

ModelParams ModelParams::from_json_string(std::string_view text) {
  const json j = json::parse(text);
  if (j.at("schema").get<std::string>() != "mstl-model/v1")
    throw std::invalid_argument("unsupported model schema");
  ModelParams p;
  const json& a = j.at("arch");
  p.arch.attributes = a.at("attributes").get<int>();
  p.arch.rows = a.at("rows").get<int>();
  p.arch.templates = a.at("templates").get<int>();
  p.arch.dims = a.at("dims").get<int>();
  p.arch.steps = a.at("steps").get<int>();
  p.arch.mode = mode_from(a.at("mode").get<std::string>());
  p.arch.mask_gain = a.at("mask_gain").get<double>();
  p.arch.check();
  for (const json& m : j.at("meta")) {
    const std::string op = m.at("op").get<std::string>();
    if (op != "F" && op != "G") throw std::invalid_argument("unknown template operator: " + op);
    p.meta.push_back({op == "F" ? TemporalOp::Eventually : TemporalOp::Always,
                      m.at("axis").get<int>(), m.at("sign").get<int>()});
  }
  if (p.meta.size() != static_cast<size_t>(p.arch.templates))
    throw std::invalid_argument("model meta size does not match template count");
  p.theta = j.at("theta").get<std::vector<double>>();
  if (p.theta.size() != p.param_count())
    throw std::invalid_argument("model parameter count does not match architecture");
  p.beta = j.at("beta").get<double>();
  return p;
}

void ModelParams::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << to_json_string() << '\n';
}

ModelParams ModelParams::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_string(buf.str());
}

}  // namespace mstl
