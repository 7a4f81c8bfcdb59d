// Copyright 2026 The gammadict Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace gammadict {

// Failures while reading or writing files (exit code 2 at the CLI).
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// NaN/Inf showing up in training or inference (exit code 3 at the CLI).
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file contents: bad CSV cells, schema or version mismatches.
class parse_error : public io_error {
 public:
  using io_error::io_error;
};

}  // namespace gammadict
