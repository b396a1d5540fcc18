#pragma once

#include <stdexcept>
#include <string>

namespace dseg {

// Broken precondition on an argument (wrong dimension, bad stepsize ordering, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid combination of settings, e.g. a GAN minibatch oracle on a bilinear problem.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A metric was requested on a problem that cannot provide it.
class UnsupportedMetric : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Generic numerical failure (factorization, resampling budget exhausted, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dseg
