// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace rlpipe {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a documented precondition or schema.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Remote call failed; safe to retry, nothing was mutated.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Host is missing something the operation needs (toolchain, binary).
class EnvironmentError : public Error {
 public:
  using Error::Error;
};

}  // namespace rlpipe
