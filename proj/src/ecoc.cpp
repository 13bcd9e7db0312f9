#include "mstl/ecoc.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mstl {

using nlohmann::json;

int64_t max_usable_columns(int classes) {
  if (classes < 1 || classes > 62)
    throw std::invalid_argument("max_usable_columns: classes out of range");
  return (int64_t{1} << (classes - 1)) - 1;
}

CodingMatrix::CodingMatrix(int classes, int attributes, std::vector<int> entries)
    : classes_(classes), attributes_(attributes), entries_(std::move(entries)) {
  if (classes_ < 1 || attributes_ < 1)
    throw std::invalid_argument("coding matrix must have at least one row and column");
  if (entries_.size() != static_cast<size_t>(classes_) * attributes_)
    throw std::invalid_argument("coding matrix entry count does not match shape");
  for (const int e : entries_)
    if (e != 1 && e != -1)
      throw std::invalid_argument("coding matrix entries must be +1 or -1");
  std::set<std::vector<int>> seen;
  for (int j = 0; j < classes_; ++j) {
    std::vector<int> row(entries_.begin() + static_cast<size_t>(j) * attributes_,
                         entries_.begin() + static_cast<size_t>(j + 1) * attributes_);
    if (!seen.insert(std::move(row)).second)
      throw std::invalid_argument("coding matrix rows must be unique");
  }
}

int CodingMatrix::entry(int row, int col) const {
  if (row < 0 || row >= classes_ || col < 0 || col >= attributes_)
    throw std::out_of_range("coding matrix index out of range");
  return entries_[static_cast<size_t>(row) * attributes_ + col];
}

CodingMatrix CodingMatrix::one_hot(int classes) {
  std::vector<int> e(static_cast<size_t>(classes) * classes, -1);
  for (int j = 0; j < classes; ++j) e[static_cast<size_t>(j) * classes + j] = 1;
  return CodingMatrix(classes, classes, std::move(e));
}

CodingMatrix CodingMatrix::preset(std::string_view name) {
  const auto P = 1, N = -1;
  if (name == "naval-class") return one_hot(3);
  if (name == "naval-a1")
    return CodingMatrix(3, 2, {P, N,
                               P, P,
                               N, N});
  if (name == "naval-a2")
    return CodingMatrix(3, 2, {P, P,
                               P, N,
                               N, N});
  if (name == "naval-a3")
    return CodingMatrix(3, 2, {P, P,
                               N, N,
                               P, N});
  if (name == "synthetic")
    return CodingMatrix(5, 4, {P, P, N, N,
                               P, N, P, N,
                               N, P, P, N,
                               N, N, N, P,
                               N, P, N, N});
  if (name == "zeroshot-obs")
    return CodingMatrix(4, 4, {P, P, N, N,
                               P, N, P, N,
                               N, P, P, N,
                               N, N, N, P});
  if (name == "zeroshot-pred") return CodingMatrix(1, 4, {N, P, N, N});
  throw std::invalid_argument("unknown coding matrix preset: " + std::string(name));
}

std::vector<std::string> CodingMatrix::preset_names() {
  return {"naval-class", "naval-a1", "naval-a2", "naval-a3",
          "synthetic",   "zeroshot-obs", "zeroshot-pred"};
}

CodingMatrix CodingMatrix::vstack(const CodingMatrix& below) const {
  if (below.attributes_ != attributes_)
    throw std::invalid_argument("vstack: attribute counts differ");
  std::vector<int> e = entries_;
  e.insert(e.end(), below.entries_.begin(), below.entries_.end());
  return CodingMatrix(classes_ + below.classes_, attributes_, std::move(e));
}

EcocValidation CodingMatrix::validate() const {
  EcocValidation out;
  for (int k = 0; k < attributes_; ++k) {
    bool constant = true;
    for (int j = 1; j < classes_ && constant; ++j)
      constant = entry(j, k) == entry(0, k);
    if (constant)
      out.warnings.push_back("column " + std::to_string(k + 1) +
                             " is constant and separates nothing");
  }
  for (int k = 0; k < attributes_; ++k)
    for (int l = k + 1; l < attributes_; ++l) {
      bool complementary = true;
      for (int j = 0; j < classes_ && complementary; ++j)
        complementary = entry(j, k) == -entry(j, l);
      if (complementary)
        out.warnings.push_back("columns " + std::to_string(k + 1) + " and " +
                               std::to_string(l + 1) + " are complementary");
    }

  out.min_row_hamming = attributes_;
  for (int j = 0; j < classes_; ++j)
    for (int i = j + 1; i < classes_; ++i) {
      int d = 0;
      for (int k = 0; k < attributes_; ++k) d += entry(j, k) != entry(i, k);
      out.min_row_hamming = std::min(out.min_row_hamming, d);
    }
  if (classes_ < 2) out.min_row_hamming = 0;

  out.within_usable_bound = attributes_ <= max_usable_columns(std::max(classes_, 2));
  return out;
}

std::string CodingMatrix::to_json_string() const {
  json j;
  j["classes"] = classes_;
  j["attributes"] = attributes_;
  auto rows = json::array();
  for (int r = 0; r < classes_; ++r) {
    auto row = json::array();
    for (int k = 0; k < attributes_; ++k) row.push_back(entry(r, k));
    rows.push_back(std::move(row));
  }
  j["matrix"] = std::move(rows);
  return j.dump(2);
}

CodingMatrix CodingMatrix::from_json_string(std::string_view text) {
  const json j = json::parse(text);
  const int classes = j.at("classes").get<int>();
  const int attributes = j.at("attributes").get<int>();
  const auto& rows = j.at("matrix");
  if (!rows.is_array() || static_cast<int>(rows.size()) != classes)
    throw std::invalid_argument("coding matrix JSON: row count does not match classes");
  std::vector<int> entries;
  entries.reserve(static_cast<size_t>(classes) * attributes);
  for (const auto& row : rows) {
    if (!row.is_array() || static_cast<int>(row.size()) != attributes)
      throw std::invalid_argument("coding matrix JSON: column count does not match attributes");
    for (const auto& e : row) entries.push_back(e.get<int>());
  }
  return CodingMatrix(classes, attributes, std::move(entries));
}

void CodingMatrix::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << to_json_string() << '\n';
}

CodingMatrix CodingMatrix::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_string(buf.str());
}

FormulaPtr class_decoder(const CodingMatrix& code, int row,
                         std::span<const FormulaPtr> attributes) {
  if (static_cast<int>(attributes.size()) != code.attributes())
    throw std::invalid_argument("class_decoder: wrong number of attribute formulae");
  std::vector<FormulaPtr> terms;
  terms.reserve(attributes.size());
  for (int k = 0; k < code.attributes(); ++k)
    terms.push_back(code.entry(row, k) > 0 ? attributes[k]
                                           : Formula::negate(attributes[k]));
  if (terms.size() == 1) return terms[0];
  return Formula::conj(std::move(terms));
}

}  // namespace mstl
