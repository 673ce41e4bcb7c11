// Copyright 2026 The incompat Authors
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

#include "incompat/bounds.hpp"
#include "incompat/channels.hpp"
#include "incompat/classify.hpp"
#include "incompat/compat.hpp"
#include "incompat/constructions.hpp"
#include "incompat/io.hpp"
#include "incompat/linalg.hpp"
#include "incompat/observables.hpp"
#include "incompat/random.hpp"
