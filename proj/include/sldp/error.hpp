// Copyright 2026 The SLDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SLDP_ERROR_HPP_
#define SLDP_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace sldp {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition was violated by the caller.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A client received a broadcast inconsistent with its own region history.
class ProtocolDesync : public Error {
 public:
  using Error::Error;
};

class MalformedTranscript : public Error {
 public:
  using Error::Error;
};

// Input data could not be read, parsed or satisfied.
class DataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace internal {

inline void Require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace internal
}  // namespace sldp

#endif  // SLDP_ERROR_HPP_
