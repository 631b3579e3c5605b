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

// Umbrella header for the parts of the library that do not need networking.

#ifndef VQAEVAL_VQAEVAL_HPP_
#define VQAEVAL_VQAEVAL_HPP_

#include "vqaeval/annotation.hpp"
#include "vqaeval/augment.hpp"
#include "vqaeval/contrastive.hpp"
#include "vqaeval/core.hpp"
#include "vqaeval/cosine.hpp"
#include "vqaeval/embedder.hpp"
#include "vqaeval/encoder.hpp"
#include "vqaeval/gradcheck.hpp"
#include "vqaeval/lexicon.hpp"
#include "vqaeval/pairs.hpp"
#include "vqaeval/porter.hpp"
#include "vqaeval/properties.hpp"
#include "vqaeval/random.hpp"
#include "vqaeval/stats.hpp"
#include "vqaeval/textmetrics.hpp"
#include "vqaeval/trainer.hpp"

namespace vqaeval {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace vqaeval

#endif  // VQAEVAL_VQAEVAL_HPP_
