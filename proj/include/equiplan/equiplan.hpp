#pragma once

#include "equiplan/benchmark.hpp"
#include "equiplan/bnb.hpp"
#include "equiplan/envelope.hpp"
#include "equiplan/errors.hpp"
#include "equiplan/format.hpp"
#include "equiplan/generator.hpp"
#include "equiplan/grid.hpp"
#include "equiplan/heuristic.hpp"
#include "equiplan/lp.hpp"
#include "equiplan/metrics.hpp"
#include "equiplan/plan_io.hpp"
#include "equiplan/polish.hpp"
#include "equiplan/relaxation.hpp"
#include "equiplan/scenario.hpp"
#include "equiplan/scenario_io.hpp"
#include "equiplan/stats.hpp"
#include "equiplan/utility.hpp"
