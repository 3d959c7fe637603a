// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace resnerf {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Tensor shapes do not conform to an operation's contract.
struct DimensionError : Error {
  using Error::Error;
};

/// A forward pass produced NaN or Inf.
struct NumericError : Error {
  using Error::Error;
};

/// Bad experiment configuration or CLI arguments.
struct ConfigError : Error {
  using Error::Error;
};

/// Malformed or missing dataset / checkpoint / run artifacts.
struct DataError : Error {
  using Error::Error;
};

}  // namespace resnerf
