#pragma once

#include <span>
#include <vector>

#include "mstl/autodiff.hpp"
#include "mstl/ecoc.hpp"

namespace mstl {

// All functions take a batch robustness matrix rob[i][k]: the k-th code-bit
// robustness of sample i. For attribute-based work the bits are attribute
// formulae and the code is the ECOC matrix E; for class-based work the bits
// are class decoders and the code is the one-hot class table C. labels[i]
// is the 0-based true class of sample i.

// m_k = min_i ReLU(code(y_i,k) * rob[i][k]).
std::vector<double> margins(const CodingMatrix& code, std::span<const int> labels,
                            std::span<const std::vector<double>> rob);

// L = sum_k sum_i ( ReLU(m_k - code(y_i,k)*rob[i][k]) - delta*m_k ).
// The graph version routes each margin's gradient to the sample that attains
// the batch minimum (ties: lowest sample index).
ad::Var margin_loss(ad::Tape& tape, const CodingMatrix& code,
                    std::span<const int> labels,
                    std::span<const std::vector<ad::Var>> rob, double delta);
double margin_loss_value(const CodingMatrix& code, std::span<const int> labels,
                         std::span<const std::vector<double>> rob, double delta);

// Plain hinge at zero, no margin terms: L = sum_k sum_i ReLU(-code(y_i,k)*rob[i][k]).
// Used as the no-margin baseline in ablations.
ad::Var hinge_loss(ad::Tape& tape, const CodingMatrix& code, std::span<const int> labels,
                   std::span<const std::vector<ad::Var>> rob);
double hinge_loss_value(const CodingMatrix& code, std::span<const int> labels,
                        std::span<const std::vector<double>> rob);

// argmin_j sum_k (1 - sign(code(j,k)*r_k)), with sign(0) = -1 and ties
// resolved to the lowest class index. Returns the 0-based class.
int decode_hamming(const CodingMatrix& code, std::span<const double> rob);

// argmin_j sum_k ReLU(-code(j,k)*r_k), ties to the lowest class index.
int decode_loss_based(const CodingMatrix& code, std::span<const double> rob);

}  // namespace mstl
