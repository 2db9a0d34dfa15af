// Copyright 2026 The WHIS Toolkit Authors. All Rights Reserved.
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

#include "whis/audio_io.hpp"
#include "whis/auditory_scale.hpp"
#include "whis/channel_table.hpp"
#include "whis/config.hpp"
#include "whis/errors.hpp"
#include "whis/eval.hpp"
#include "whis/export.hpp"
#include "whis/filter_core.hpp"
#include "whis/framer.hpp"
#include "whis/gcfb.hpp"
#include "whis/hl0_table.hpp"
#include "whis/hl_model.hpp"
#include "whis/signal.hpp"
#include "whis/simulator.hpp"
#include "whis/whis_analysis.hpp"
#include "whis/whis_synth.hpp"
