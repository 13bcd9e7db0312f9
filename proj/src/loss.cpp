#include "mstl/loss.hpp"

#include <limits>
#include <stdexcept>

namespace mstl {

namespace {

template <typename Row>
void check_batch(const CodingMatrix& code, std::span<const int> labels,
                 std::span<const Row> rob) {
  if (labels.size() != rob.size())
    throw std::invalid_argument("labels/robustness size mismatch");
  if (rob.empty()) throw std::invalid_argument("empty batch");
  for (const Row& row : rob)
    if (row.size() != static_cast<size_t>(code.attributes()))
      throw std::invalid_argument("robustness width does not match code columns");
  for (const int y : labels)
    if (y < 0 || y >= code.classes())
      throw std::invalid_argument("label out of range for coding matrix");
}

}  // namespace

std::vector<double> margins(const CodingMatrix& code, std::span<const int> labels,
                            std::span<const std::vector<double>> rob) {
  check_batch(code, labels, rob);
  std::vector<double> m(code.attributes());
  for (int k = 0; k < code.attributes(); ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < rob.size(); ++i)
      best = std::min(best, ad::relu(code.entry(labels[i], k) * rob[i][k]));
    m[k] = best;
  }
  return m;
}

ad::Var margin_loss(ad::Tape& tape, const CodingMatrix& code,
                    std::span<const int> labels,
                    std::span<const std::vector<ad::Var>> rob, double delta) {
  check_batch(code, labels, rob);
  const size_t n_samples = rob.size();

  ad::Var total = tape.constant(0.0);
  std::vector<ad::Var> signed_col(n_samples), relu_col(n_samples);
  for (int k = 0; k < code.attributes(); ++k) {
    for (size_t i = 0; i < n_samples; ++i) {
      signed_col[i] = tape.scale(rob[i][k], code.entry(labels[i], k));
      relu_col[i] = tape.relu(signed_col[i]);
    }
    size_t arg = 0;
    for (size_t i = 1; i < n_samples; ++i)
      if (relu_col[i].value() < relu_col[arg].value()) arg = i;
    const ad::Var m = relu_col[arg];
    for (size_t i = 0; i < n_samples; ++i) {
      total = tape.add(total, tape.relu(tape.sub(m, signed_col[i])));
      total = tape.sub(total, tape.scale(m, delta));
    }
  }
  return total;
}

double margin_loss_value(const CodingMatrix& code, std::span<const int> labels,
                         std::span<const std::vector<double>> rob, double delta) {
  const std::vector<double> m = margins(code, labels, rob);
  double total = 0.0;
  for (int k = 0; k < code.attributes(); ++k)
    for (size_t i = 0; i < rob.size(); ++i)
      total += ad::relu(m[k] - code.entry(labels[i], k) * rob[i][k]) - delta * m[k];
  return total;
}

ad::Var hinge_loss(ad::Tape& tape, const CodingMatrix& code, std::span<const int> labels,
                   std::span<const std::vector<ad::Var>> rob) {
  check_batch(code, labels, rob);
  ad::Var total = tape.constant(0.0);
  for (int k = 0; k < code.attributes(); ++k)
    for (size_t i = 0; i < rob.size(); ++i)
      total = tape.add(total, tape.relu(tape.scale(rob[i][k], -code.entry(labels[i], k))));
  return total;
}

double hinge_loss_value(const CodingMatrix& code, std::span<const int> labels,
                        std::span<const std::vector<double>> rob) {
  check_batch(code, labels, rob);
  double total = 0.0;
  for (int k = 0; k < code.attributes(); ++k)
    for (size_t i = 0; i < rob.size(); ++i)
      total += ad::relu(-code.entry(labels[i], k) * rob[i][k]);
  return total;
}

int decode_hamming(const CodingMatrix& code, std::span<const double> rob) {
  if (rob.size() != static_cast<size_t>(code.attributes()))
    throw std::invalid_argument("robustness width does not match code columns");
  auto sign = [](double x) { return x > 0 ? 1 : -1; };  // sign(0) = -1
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int j = 0; j < code.classes(); ++j) {
    double d = 0;
    for (int k = 0; k < code.attributes(); ++k)
      d += 1 - sign(code.entry(j, k) * rob[k]);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

int decode_loss_based(const CodingMatrix& code, std::span<const double> rob) {
  if (rob.size() != static_cast<size_t>(code.attributes()))
    throw std::invalid_argument("robustness width does not match code columns");
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int j = 0; j < code.classes(); ++j) {
    double d = 0;
    for (int k = 0; k < code.attributes(); ++k)
      d += ad::relu(-code.entry(j, k) * rob[k]);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

}  // namespace mstl
