#include "mstl/formula.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mstl {

namespace {

// The default ctor is private; the move ctor is public, so factories hand
// finished nodes to make_shared by move.
FormulaPtr make(Formula&& f) { return std::make_shared<const Formula>(std::move(f)); }

}  // namespace

FormulaPtr Formula::predicate(std::vector<double> weights, double threshold, Cmp cmp) {
  if (weights.empty()) throw std::invalid_argument("predicate: empty weight vector");
  Formula f;
  f.kind_ = Kind::Predicate;
  f.weights_ = std::move(weights);
  f.threshold_ = threshold;
  f.cmp_ = cmp;
  return make(std::move(f));
}

FormulaPtr Formula::axis_predicate(int axis, Cmp cmp, double threshold) {
  if (axis < 0) throw std::invalid_argument("axis_predicate: negative axis");
  std::vector<double> w(static_cast<size_t>(axis) + 1, 0.0);
  w.back() = 1.0;
  return predicate(std::move(w), threshold, cmp);
}

FormulaPtr Formula::negate(FormulaPtr child) {
  if (!child) throw std::invalid_argument("negate: null child");
  Formula f;
  f.kind_ = Kind::Not;
  f.children_ = {std::move(child)};
  return make(std::move(f));
}

FormulaPtr Formula::conj(std::vector<FormulaPtr> children) {
  if (children.size() < 2) throw std::invalid_argument("conj: needs at least 2 children");
  Formula f;
  f.kind_ = Kind::And;
  f.children_ = std::move(children);
  return make(std::move(f));
}

FormulaPtr Formula::disj(std::vector<FormulaPtr> children) {
  if (children.size() < 2) throw std::invalid_argument("disj: needs at least 2 children");
  Formula f;
  f.kind_ = Kind::Or;
  f.children_ = std::move(children);
  return make(std::move(f));
}

static void check_window(Interval w) {
  if (w.lo < 0 || w.hi < 0 || w.lo > w.hi)
    throw std::invalid_argument("temporal interval requires 0 <= t1 <= t2");
}

FormulaPtr Formula::eventually(Interval window, FormulaPtr child) {
  check_window(window);
  if (!child) throw std::invalid_argument("eventually: null child");
  Formula f;
  f.kind_ = Kind::Eventually;
  f.window_ = window;
  f.children_ = {std::move(child)};
  return make(std::move(f));
}

FormulaPtr Formula::always(Interval window, FormulaPtr child) {
  check_window(window);
  if (!child) throw std::invalid_argument("always: null child");
  Formula f;
  f.kind_ = Kind::Always;
  f.window_ = window;
  f.children_ = {std::move(child)};
  return make(std::move(f));
}

bool Formula::equals(const Formula& o) const {
  if (kind_ != o.kind_) return false;
  switch (kind_) {
    case Kind::Predicate:
      return weights_ == o.weights_ && threshold_ == o.threshold_ && cmp_ == o.cmp_;
    case Kind::Eventually:
    case Kind::Always:
      if (!(window_ == o.window_)) return false;
      break;
    default:
      break;
  }
  if (children_.size() != o.children_.size()) return false;
  for (size_t i = 0; i < children_.size(); ++i)
    if (!children_[i]->equals(*o.children_[i])) return false;
  return true;
}

bool equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (!a || !b) return a == b;
  return a->equals(*b);
}

double robustness(const Formula& phi, const Signal& s, int tau) {
  if (tau < 1 || tau > s.steps()) throw std::out_of_range("robustness: tau outside [1, T]");
  switch (phi.kind()) {
    case Kind::Predicate: {
      const auto& w = phi.weights();
      if (static_cast<int>(w.size()) > s.dim())
        throw std::invalid_argument("robustness: predicate references a dimension beyond d");
      double v = 0.0;
      for (size_t k = 0; k < w.size(); ++k) v += w[k] * s.at(tau, static_cast<int>(k));
      return phi.cmp() == Cmp::Ge ? v - phi.threshold() : phi.threshold() - v;
    }
    case Kind::Not:
      return -robustness(*phi.children()[0], s, tau);
    case Kind::And: {
      double r = robustness(*phi.children()[0], s, tau);
      for (size_t i = 1; i < phi.children().size(); ++i)
        r = std::min(r, robustness(*phi.children()[i], s, tau));
      return r;
    }
    case Kind::Or: {
      double r = robustness(*phi.children()[0], s, tau);
      for (size_t i = 1; i < phi.children().size(); ++i)
        r = std::max(r, robustness(*phi.children()[i], s, tau));
      return r;
    }
    case Kind::Always:
    case Kind::Eventually: {
      const int lo = tau + phi.window().lo;
      const int hi = std::min(tau + phi.window().hi, s.steps());
      if (lo > hi)
        throw std::out_of_range("robustness: temporal window is empty after clipping to [1, T]");
      double r = robustness(*phi.children()[0], s, lo);
      for (int t = lo + 1; t <= hi; ++t) {
        const double c = robustness(*phi.children()[0], s, t);
        r = phi.kind() == Kind::Always ? std::min(r, c) : std::max(r, c);
      }
      return r;
    }
  }
  throw std::logic_error("robustness: unknown node kind");
}

bool satisfies(const Formula& phi, const Signal& s) { return robustness(phi, s, 1) > 0.0; }

}  // namespace mstl
