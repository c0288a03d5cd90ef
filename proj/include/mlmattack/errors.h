// Copyright 2026 The mlmattack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MLMATTACK_ERRORS_H_
#define MLMATTACK_ERRORS_H_

#include <stdexcept>
#include <string>

namespace mlmattack {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class VocabMissingSpecialToken : public Error {
 public:
  using Error::Error;
};

// Transport or load failure of a model backend.
class BackendUnavailable : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class SequenceTooLong : public Error {
 public:
  using Error::Error;
};

class SpanTooLong : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class LabelMapMismatch : public Error {
 public:
  using Error::Error;
};

// Invalid configuration. `field` is a dotted path such as "attack.epsilon".
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace mlmattack

#endif  // MLMATTACK_ERRORS_H_
