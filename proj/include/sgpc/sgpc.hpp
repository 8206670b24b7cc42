/*
 * Copyright (c) 2026, The SGPC Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Umbrella header for the whole library.

#include "sgpc/core.hpp"
#include "sgpc/graph.hpp"
#include "sgpc/cg.hpp"
#include "sgpc/lanczos.hpp"
#include "sgpc/sheaf_laplacian.hpp"
#include "sgpc/ot_lift.hpp"
#include "sgpc/diffusion.hpp"
#include "sgpc/calibration.hpp"
#include "sgpc/spectral_opt.hpp"
#include "sgpc/synthetic.hpp"
#include "sgpc/model.hpp"
#include "sgpc/trainer.hpp"
#include "sgpc/config.hpp"
#include "sgpc/verify.hpp"
