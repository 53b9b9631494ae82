// Copyright 2026 The NIMA Toolkit Authors. All Rights Reserved.
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

#ifndef NIMA_ERROR_H_
#define NIMA_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace nima {

// Coarse failure class; the CLI maps these onto process exit codes.
enum class ErrorCategory {
  kUsage = 1,
  kData = 2,
  kNumerical = 3,
};

std::string_view CategoryName(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what)
      : Error(ErrorCategory::kUsage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what)
      : Error(ErrorCategory::kData, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorCategory::kNumerical, what) {}
};

// Raised when two distributions (or a distribution and a model head) are
// defined over different bucket scales.
class ScaleMismatchError : public DataError {
 public:
  explicit ScaleMismatchError(const std::string& what) : DataError(what) {}
};

class LengthMismatchError : public DataError {
 public:
  explicit LengthMismatchError(const std::string& what) : DataError(what) {}
};

// Zero variance in an input to a correlation.
class DegenerateInputError : public NumericalError {
 public:
  explicit DegenerateInputError(const std::string& what)
      : NumericalError(what) {}
};

}  // namespace nima

#endif  // NIMA_ERROR_H_
