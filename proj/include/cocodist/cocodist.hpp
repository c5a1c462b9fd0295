// Copyright (c) 2026, the cocodist authors. All rights reserved.
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

#ifndef COCODIST_COCODIST_HPP_
#define COCODIST_COCODIST_HPP_

#include "cocodist/blend.hpp"
#include "cocodist/builder.hpp"
#include "cocodist/coco.hpp"
#include "cocodist/convolve.hpp"
#include "cocodist/distortions.hpp"
#include "cocodist/error.hpp"
#include "cocodist/eval.hpp"
#include "cocodist/image.hpp"
#include "cocodist/image_io.hpp"
#include "cocodist/mask.hpp"
#include "cocodist/report.hpp"
#include "cocodist/rng.hpp"

#endif  // COCODIST_COCODIST_HPP_
