#pragma once

#include "harvestsim/config.hpp"
#include "harvestsim/convert.hpp"
#include "harvestsim/engine.hpp"
#include "harvestsim/harvest.hpp"
#include "harvestsim/node.hpp"
#include "harvestsim/planner.hpp"
#include "harvestsim/report.hpp"
#include "harvestsim/store.hpp"
#include "harvestsim/traces.hpp"
