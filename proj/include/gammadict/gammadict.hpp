// Copyright 2026 The gammadict Authors. All Rights Reserved.
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

#include "gammadict/dataio.hpp"
#include "gammadict/gamma_vae.hpp"
#include "gammadict/metrics.hpp"
#include "gammadict/nmf.hpp"
#include "gammadict/numkit.hpp"
#include "gammadict/signal.hpp"
#include "gammadict/trainer.hpp"
