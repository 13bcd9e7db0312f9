#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace mstl::ad {

// Smallest weight considered "present" in a weighted softmin/softmax.
inline constexpr double kWeightEps = 1e-6;

class Tape;

// Handle to a node on a Tape. Cheap to copy; invalidated by Tape::clear().
class Var {
 public:
  Var() = default;
  double value() const;
  double grad() const;

 private:
  friend class Tape;
  Var(Tape* tape, int32_t idx) : tape_(tape), idx_(idx) {}
  Tape* tape_ = nullptr;
  int32_t idx_ = -1;
};

// Scalar reverse-mode computation graph. Nodes are appended in evaluation
// order, which is a topological order by construction; backward() walks
// it once in reverse.
class Tape {
 public:
  Var leaf(double value) { return push(value); }
  Var constant(double value) { return push(value); }

  Var add(Var a, Var b) { return push(val(a) + val(b), {{a.idx_, 1.0}, {b.idx_, 1.0}}); }
  Var sub(Var a, Var b) { return push(val(a) - val(b), {{a.idx_, 1.0}, {b.idx_, -1.0}}); }
  Var mul(Var a, Var b) {
    return push(val(a) * val(b), {{a.idx_, val(b)}, {b.idx_, val(a)}});
  }
  Var neg(Var a) { return push(-val(a), {{a.idx_, -1.0}}); }
  Var add_const(Var a, double c) { return push(val(a) + c, {{a.idx_, 1.0}}); }
  Var scale(Var a, double c) { return push(val(a) * c, {{a.idx_, c}}); }
  Var relu(Var a) {
    const double v = val(a);
    return push(v > 0 ? v : 0.0, {{a.idx_, v > 0 ? 1.0 : 0.0}});
  }
  Var sigmoid(Var a) {
    const double s = sigmoid_value(val(a));
    return push(s, {{a.idx_, s * (1.0 - s)}});
  }

  // Normalized weighted log-sum-exp softmin:
  //   -(1/beta) * ln( sum_i w_i e^{-beta v_i} / sum_i w_i )
  // Errors if every weight is below kWeightEps.
  Var softmin(std::span<const Var> values, std::span<const Var> weights, double beta);
  Var softmin(std::span<const Var> values, double beta);  // unit weights
  // softmax(v) = -softmin(-v)
  Var softmax(std::span<const Var> values, std::span<const Var> weights, double beta);
  Var softmax(std::span<const Var> values, double beta);

  // Resets all gradients, then accumulates d(output)/d(node) for every
  // node at or below `output`.
  void backward(Var output);

  size_t size() const { return nodes_.size(); }
  void clear() {
    nodes_.clear();
    parents_.clear();
  }

  static double sigmoid_value(double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }

 private:
  friend class Var;

  struct Node {
    double value;
    double grad;
    int32_t pbegin;
    int32_t pend;
  };
  struct Edge {
    int32_t parent;
    double partial;
  };

  double val(Var v) const { return nodes_[v.idx_].value; }

  Var push(double value) {
    nodes_.push_back({value, 0.0, 0, 0});
    return Var(this, static_cast<int32_t>(nodes_.size() - 1));
  }
  Var push(double value, std::initializer_list<Edge> edges) {
    const auto begin = static_cast<int32_t>(parents_.size());
    for (const Edge& e : edges) parents_.push_back(e);
    nodes_.push_back({value, 0.0, begin, static_cast<int32_t>(parents_.size())});
    return Var(this, static_cast<int32_t>(nodes_.size() - 1));
  }

  std::vector<Node> nodes_;
  std::vector<Edge> parents_;
};

inline double Var::value() const { return tape_->nodes_[idx_].value; }
inline double Var::grad() const { return tape_->nodes_[idx_].grad; }

// --- numeric twins -----------------------------------------------------
//
// The relaxed network forward is written once, generic over the scalar
// type; these overloads give `double` the same vocabulary as Var.

double softmin_value(std::span<const double> values, std::span<const double> weights, double beta);
double softmin_value(std::span<const double> values, double beta);
double softmax_value(std::span<const double> values, std::span<const double> weights, double beta);
double softmax_value(std::span<const double> values, double beta);

inline double sigmoid(double x) { return Tape::sigmoid_value(x); }
inline double relu(double x) { return x > 0 ? x : 0.0; }

// Max relative error between the reverse-mode gradient of `f` and central
// finite differences at `point`. `f` must rebuild its graph on the given
// tape at every call.
double finite_diff_check(const std::function<Var(Tape&, std::span<const Var>)>& f,
                         std::span<const double> point, double epsilon = 1e-5);

}  // namespace mstl::ad
