// Copyright 2026 The apiprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace apiprompt {

// Single exception type for every recoverable failure in the toolkit. The
// message always names the offending entity (tensor, annotation id, file).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace apiprompt
