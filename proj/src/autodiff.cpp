#include "mstl/autodiff.hpp"

#include <algorithm>
#include <limits>

namespace mstl::ad {

namespace {

// Shared softmin kernel. Returns the value and, when `partials` is non-null,
// fills d(out)/d(v_j) followed by d(out)/d(w_j).
//
//   out = -(1/beta) ln( sum_j w_j e^{-beta v_j} / sum_j w_j )
//
// Factoring e^{-beta m} (m = min over entries with usable weight) out of the
// numerator keeps every exponent <= 0.
double softmin_kernel(std::span<const double> v, std::span<const double> w, double beta,
                      std::vector<double>* value_partials, std::vector<double>* weight_partials) {
  if (v.empty()) throw std::invalid_argument("softmin of zero values");
  if (v.size() != w.size()) throw std::invalid_argument("softmin values/weights size mismatch");
  if (!(beta > 0)) throw std::invalid_argument("softmin requires beta > 0");

  double wmax = 0.0;
  for (const double wj : w) wmax = std::max(wmax, wj);
  if (wmax < kWeightEps)
    throw std::domain_error("softmin: all weights below threshold");

  // Factor out the global min so every exponent is <= 0.
  double m = v[0];
  for (const double vj : v) m = std::min(m, vj);

  double num = 0.0, den = 0.0;
  for (size_t j = 0; j < v.size(); ++j) {
    num += w[j] * std::exp(-beta * (v[j] - m));
    den += w[j];
  }
  const double out = m - std::log(num / den) / beta;
  if (!std::isfinite(out)) throw std::domain_error("softmin: value not finite");

  if (value_partials) {
    value_partials->resize(v.size());
    for (size_t j = 0; j < v.size(); ++j)
      (*value_partials)[j] = w[j] * std::exp(-beta * (v[j] - m)) / num;
  }
  if (weight_partials) {
    weight_partials->resize(v.size());
    for (size_t j = 0; j < v.size(); ++j)
      (*weight_partials)[j] = -(std::exp(-beta * (v[j] - m)) / num - 1.0 / den) / beta;
  }
  return out;
}

}  // namespace

Var Tape::softmin(std::span<const Var> values, std::span<const Var> weights, double beta) {
  std::vector<double> v(values.size()), w(weights.size());
  for (size_t j = 0; j < values.size(); ++j) v[j] = val(values[j]);
  for (size_t j = 0; j < weights.size(); ++j) w[j] = val(weights[j]);

  std::vector<double> dv, dw;
  const double out = softmin_kernel(v, w, beta, &dv, &dw);

  const auto begin = static_cast<int32_t>(parents_.size());
  for (size_t j = 0; j < values.size(); ++j) parents_.push_back({values[j].idx_, dv[j]});
  for (size_t j = 0; j < weights.size(); ++j) parents_.push_back({weights[j].idx_, dw[j]});
  nodes_.push_back({out, 0.0, begin, static_cast<int32_t>(parents_.size())});
  return Var(this, static_cast<int32_t>(nodes_.size() - 1));
}

Var Tape::softmin(std::span<const Var> values, double beta) {
  std::vector<double> v(values.size());
  for (size_t j = 0; j < values.size(); ++j) v[j] = val(values[j]);
  const std::vector<double> w(values.size(), 1.0);

  std::vector<double> dv;
  const double out = softmin_kernel(v, w, beta, &dv, nullptr);

  const auto begin = static_cast<int32_t>(parents_.size());
  for (size_t j = 0; j < values.size(); ++j) parents_.push_back({values[j].idx_, dv[j]});
  nodes_.push_back({out, 0.0, begin, static_cast<int32_t>(parents_.size())});
  return Var(this, static_cast<int32_t>(nodes_.size() - 1));
}

Var Tape::softmax(std::span<const Var> values, std::span<const Var> weights, double beta) {
  std::vector<Var> negated(values.size());
  for (size_t j = 0; j < values.size(); ++j) negated[j] = neg(values[j]);
  return neg(softmin(negated, weights, beta));
}

Var Tape::softmax(std::span<const Var> values, double beta) {
  std::vector<Var> negated(values.size());
  for (size_t j = 0; j < values.size(); ++j) negated[j] = neg(values[j]);
  return neg(softmin(std::span<const Var>(negated), beta));
}

void Tape::backward(Var output) {
  if (output.tape_ != this || output.idx_ < 0)
    throw std::invalid_argument("backward: output is not on this tape");
  for (Node& n : nodes_) n.grad = 0.0;
  nodes_[output.idx_].grad = 1.0;
  for (int32_t i = output.idx_; i >= 0; --i) {
    const Node& n = nodes_[i];
    if (n.grad == 0.0) continue;
    for (int32_t e = n.pbegin; e < n.pend; ++e)
      nodes_[parents_[e].parent].grad += n.grad * parents_[e].partial;
  }
}

double softmin_value(std::span<const double> values, std::span<const double> weights,
                     double beta) {
  return softmin_kernel(values, weights, beta, nullptr, nullptr);
}

double softmin_value(std::span<const double> values, double beta) {
  const std::vector<double> w(values.size(), 1.0);
  return softmin_kernel(values, w, beta, nullptr, nullptr);
}

double softmax_value(std::span<const double> values, std::span<const double> weights,
                     double beta) {
  std::vector<double> negated(values.size());
  for (size_t j = 0; j < values.size(); ++j) negated[j] = -values[j];
  return -softmin_kernel(negated, weights, beta, nullptr, nullptr);
}

double softmax_value(std::span<const double> values, double beta) {
  std::vector<double> negated(values.size());
  for (size_t j = 0; j < values.size(); ++j) negated[j] = -values[j];
  const std::vector<double> w(values.size(), 1.0);
  return -softmin_kernel(negated, w, beta, nullptr, nullptr);
}

double finite_diff_check(const std::function<Var(Tape&, std::span<const Var>)>& f,
                         std::span<const double> point, double epsilon) {
  std::vector<double> x(point.begin(), point.end());

  Tape tape;
  std::vector<Var> leaves(x.size());
  for (size_t i = 0; i < x.size(); ++i) leaves[i] = tape.leaf(x[i]);
  Var out = f(tape, leaves);
  tape.backward(out);
  std::vector<double> grad(x.size());
  for (size_t i = 0; i < x.size(); ++i) grad[i] = leaves[i].grad();

  auto eval_at = [&](const std::vector<double>& p) {
    Tape t;
    std::vector<Var> l(p.size());
    for (size_t i = 0; i < p.size(); ++i) l[i] = t.leaf(p[i]);
    return f(t, l).value();
  };

  double worst = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    std::vector<double> hi = x, lo = x;
    hi[i] += epsilon;
    lo[i] -= epsilon;
    const double fd = (eval_at(hi) - eval_at(lo)) / (2 * epsilon);
    const double rel = std::abs(grad[i] - fd) /
                       std::max({std::abs(grad[i]), std::abs(fd), 1.0});
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace mstl::ad
