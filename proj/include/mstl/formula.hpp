#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mstl/signal.hpp"

namespace mstl {

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

enum class Kind { Predicate, Not, And, Or, Eventually, Always };
enum class Cmp { Ge, Le };

// Closed integer interval [lo, hi], lo <= hi, both nonnegative.
struct Interval {
  int lo = 0;
  int hi = 0;
  bool operator==(const Interval&) const = default;
};

// Immutable formula tree. Predicates are affine: the value w . s(tau) is
// compared against a threshold. Axis-aligned predicates store a single
// unit coefficient.
class Formula {
 public:
  static FormulaPtr predicate(std::vector<double> weights, double threshold, Cmp cmp);
  // weights = e_axis (length axis+1)
  static FormulaPtr axis_predicate(int axis, Cmp cmp, double threshold);
  static FormulaPtr negate(FormulaPtr child);
  static FormulaPtr conj(std::vector<FormulaPtr> children);
  static FormulaPtr disj(std::vector<FormulaPtr> children);
  static FormulaPtr eventually(Interval window, FormulaPtr child);
  static FormulaPtr always(Interval window, FormulaPtr child);

  Kind kind() const { return kind_; }
  const std::vector<double>& weights() const { return weights_; }
  double threshold() const { return threshold_; }
  Cmp cmp() const { return cmp_; }
  Interval window() const { return window_; }
  const std::vector<FormulaPtr>& children() const { return children_; }

  bool equals(const Formula& other) const;

 private:
  Formula() = default;

  Kind kind_ = Kind::Predicate;
  std::vector<double> weights_;
  double threshold_ = 0.0;
  Cmp cmp_ = Cmp::Ge;
  Interval window_;
  std::vector<FormulaPtr> children_;
};

bool equal(const FormulaPtr& a, const FormulaPtr& b);

// Quantitative satisfaction of phi on s at time tau (1-based).
// Temporal windows are clipped to [1, T]; a fully out-of-range window
// is an error.
double robustness(const Formula& phi, const Signal& s, int tau = 1);
inline double robustness(const FormulaPtr& phi, const Signal& s, int tau = 1) {
  return robustness(*phi, s, tau);
}

// True iff robustness at tau = 1 is strictly positive; zero counts as
// violation.
bool satisfies(const Formula& phi, const Signal& s);
inline bool satisfies(const FormulaPtr& phi, const Signal& s) { return satisfies(*phi, s); }

}  // namespace mstl
