// Copyright 2026 The EAGLE Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef EAGLE_EAGLE_HPP_
#define EAGLE_EAGLE_HPP_

#include "eagle/assign.hpp"
#include "eagle/core.hpp"
#include "eagle/dataio.hpp"
#include "eagle/embeddings.hpp"
#include "eagle/errors.hpp"
#include "eagle/eval.hpp"
#include "eagle/grlr.hpp"
#include "eagle/grouping.hpp"
#include "eagle/linear_assignment.hpp"
#include "eagle/parallel.hpp"
#include "eagle/rng.hpp"
#include "eagle/simlab.hpp"

#endif  // EAGLE_EAGLE_HPP_
