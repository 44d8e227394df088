// Copyright 2026 The relate-kg Authors
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

namespace relate {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (TSV lines, config lines, checkpoints).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Token not present in a fixed vocabulary.
class VocabularyError : public Error {
 public:
  using Error::Error;
};

// Invalid hyperparameter, generator setting or CLI value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Perturbation request that cannot be satisfied.
class SpecError : public Error {
 public:
  using Error::Error;
};

class SamplingError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Training stopped on a non-finite loss.
class TrainingAbort : public Error {
 public:
  using Error::Error;
};

// Broken internal invariant (shape mismatch, self-filtered answer, ...).
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace relate
