// Copyright 2026 The hashloc Authors
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
#ifndef HASHLOC_HASHLOC_HPP_
#define HASHLOC_HASHLOC_HPP_

#include "hashloc/advisor.hpp"
#include "hashloc/app.hpp"
#include "hashloc/corpus.hpp"
#include "hashloc/embedding.hpp"
#include "hashloc/evaluation.hpp"
#include "hashloc/forest.hpp"
#include "hashloc/io.hpp"
#include "hashloc/metrics.hpp"
#include "hashloc/obfuscate.hpp"
#include "hashloc/rng.hpp"
#include "hashloc/service.hpp"
#include "hashloc/synth.hpp"
#include "hashloc/taxonomy.hpp"

#endif  // HASHLOC_HASHLOC_HPP_
