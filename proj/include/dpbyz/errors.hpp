//
// Copyright 2026 The dpbyz Authors
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
//

#ifndef DPBYZ_ERRORS_HPP_
#define DPBYZ_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace dpbyz {

// Root of every error thrown by the library. Rejections by the filters are
// values, never exceptions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

// Privacy budget cannot be met, or an attack's feasibility condition fails.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// IDX parsing failures. Each failure mode has its own subclass so callers can
// tell a corrupt header from a short read.
class DataFormatError : public Error {
 public:
  using Error::Error;
};

class WrongMagicError : public DataFormatError {
 public:
  using DataFormatError::DataFormatError;
};

class TruncatedFileError : public DataFormatError {
 public:
  using DataFormatError::DataFormatError;
};

class CountMismatchError : public DataFormatError {
 public:
  using DataFormatError::DataFormatError;
};

}  // namespace dpbyz

#endif  // DPBYZ_ERRORS_HPP_
