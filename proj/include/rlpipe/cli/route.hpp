// Copyright (c) 2026, The rlpipe Authors
// SPDX-License-Identifier: Apache-2.0
//
// Which reward channel scores a query's responses.
//
//   math                          -> math (boxed answer vs ground truth)
//   science with a ground truth   -> math (same exact/equivalence match)
//   code with tests               -> code (sandboxed execution)
//   instruction_follow            -> if   (rule validators)
//   anything without a payload    -> judge

#pragma once

#include <string_view>

#include "rlpipe/core/types.hpp"

namespace rlpipe::cli {

enum class Channel { math, code, instruction_follow, judge };

std::string_view to_string(Channel c);

// Throws ValidationError when the payload does not fit the category (a code
// query carrying instructions, say).
Channel route_for(const Query& q);

}  // namespace rlpipe::cli
