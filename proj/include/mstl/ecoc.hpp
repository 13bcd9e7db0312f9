#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mstl/formula.hpp"

namespace mstl {

// Largest number of informative columns a c-class code admits: columns that
// are constant or equal to another column up to global sign flip add nothing.
int64_t max_usable_columns(int classes);

struct EcocValidation {
  std::vector<std::string> warnings;
  int min_row_hamming = 0;         // smallest pairwise Hamming distance between rows
  bool within_usable_bound = true; // attributes <= max_usable_columns(classes)
};

// Class-by-attribute code matrix with entries in {-1,+1} and unique rows.
// Row j is the attribute signature of class j (0-based).
class CodingMatrix {
 public:
  CodingMatrix(int classes, int attributes, std::vector<int> entries);

  static CodingMatrix one_hot(int classes);
  static CodingMatrix preset(std::string_view name);
  static std::vector<std::string> preset_names();

  int classes() const { return classes_; }
  int attributes() const { return attributes_; }
  int entry(int row, int col) const;

  // Appends the rows of `below`; attribute counts must match and the result
  // must still have unique rows.
  CodingMatrix vstack(const CodingMatrix& below) const;

  EcocValidation validate() const;

  std::string to_json_string() const;
  static CodingMatrix from_json_string(std::string_view text);
  void save(const std::string& path) const;
  static CodingMatrix load(const std::string& path);

  bool operator==(const CodingMatrix&) const = default;

 private:
  int classes_;
  int attributes_;
  std::vector<int> entries_;  // row-major
};

// psi_j = AND over columns of (phi_k if +1 else !phi_k); a single column
// yields the bare (possibly negated) attribute formula.
FormulaPtr class_decoder(const CodingMatrix& code, int row,
                         std::span<const FormulaPtr> attributes);

}  // namespace mstl
