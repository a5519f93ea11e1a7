#pragma once

#include <stdexcept>
#include <string>

namespace dualseq {

// Shapes of two operands disagree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A documented precondition of an operation was violated by the caller.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Malformed or missing input data (corpus files, lexicons, checkpoints).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// NaN / Inf detected in gradients or parameters.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dualseq
