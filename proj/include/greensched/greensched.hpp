#pragma once

#include "greensched/core_model.hpp"
#include "greensched/energy_time.hpp"
#include "greensched/icsa.hpp"
#include "greensched/baselines.hpp"
#include "greensched/simulator.hpp"
#include "greensched/oracle.hpp"
#include "greensched/bench.hpp"
#include "greensched/commands.hpp"
