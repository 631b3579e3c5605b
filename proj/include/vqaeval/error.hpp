// Copyright 2026 The vqaeval Authors.
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

#ifndef VQAEVAL_ERROR_HPP_
#define VQAEVAL_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace vqaeval {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A correlation was requested on input for which it is not defined
// (constant vector, fewer than two points).
class UndefinedStatistic : public Error {
 public:
  using Error::Error;
};

}  // namespace vqaeval

#endif  // VQAEVAL_ERROR_HPP_
