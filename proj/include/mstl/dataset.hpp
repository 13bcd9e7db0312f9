#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mstl/formula.hpp"
#include "mstl/signal.hpp"

namespace mstl {

// Labeled multi-class time-series collection. All signals share one shape;
// labels are 0-based (files use 1-based class ids).
struct Dataset {
  std::vector<Signal> signals;
  std::vector<int> labels;
  int classes = 0;
  int steps = 0;
  int dims = 0;

  size_t size() const { return signals.size(); }
  void check() const;
};

// Naval scenario: 60-step planar vessel tracks on a [0,70]^2 map. Class 1
// sails to the harbor keeping well north, class 2 detours south to the
// island first, class 3 stays in the open sea. counts has one entry per
// class (zeros allowed).
Dataset generate_naval(std::span<const int> counts, uint64_t seed);

// Ground-truth class formulae for the naval scenario (one per class; every
// sample satisfies its own and violates the other two).
std::vector<FormulaPtr> naval_truth();

// Synthetic scenario: 41-step planar tracks visiting up to four boxed
// regions on schedules; five mutually exclusive classes defined by which
// regions are visited or held. counts has one entry per class.
Dataset generate_synthetic(std::span<const int> counts, uint64_t seed);

// The four region sub-formulae the synthetic classes are built from.
std::vector<FormulaPtr> synthetic_regions();

// Ground-truth class decoders for the synthetic scenario (exclusive by
// construction).
std::vector<FormulaPtr> synthetic_truth();

// True iff the signal satisfies truth[label] and violates every other
// entry.
bool verify_sample(const Signal& s, int label, std::span<const FormulaPtr> truth);

// Writes <name>_signals.csv, <name>_labels.csv and <name>_manifest.json
// under dir. Returns the manifest path.
std::string save_dataset(const Dataset& data, const std::string& dir, const std::string& name,
                         const std::string& kind, uint64_t seed);
Dataset load_dataset(const std::string& manifest_path);

}  // namespace mstl
