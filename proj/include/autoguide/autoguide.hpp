// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "autoguide/agent.hpp"
#include "autoguide/cassette.hpp"
#include "autoguide/config.hpp"
#include "autoguide/context.hpp"
#include "autoguide/error.hpp"
#include "autoguide/eval.hpp"
#include "autoguide/guideline_store.hpp"
#include "autoguide/http_backend.hpp"
#include "autoguide/lm.hpp"
#include "autoguide/prompt_template.hpp"
#include "autoguide/roles.hpp"
#include "autoguide/sim/branch_world.hpp"
#include "autoguide/sim/mini_shop.hpp"
#include "autoguide/sim/offline_data.hpp"
#include "autoguide/sim/scripted_stacks.hpp"
#include "autoguide/sim/suite.hpp"
#include "autoguide/text.hpp"
#include "autoguide/trajectory.hpp"
#include "autoguide/trajectory_io.hpp"
