#pragma once

#include "drplan/adam.hpp"
#include "drplan/bench.hpp"
#include "drplan/grid.hpp"
#include "drplan/grid_io.hpp"
#include "drplan/kernel.hpp"
#include "drplan/landscape.hpp"
#include "drplan/lps.hpp"
#include "drplan/plan_io.hpp"
#include "drplan/planner.hpp"
#include "drplan/shift.hpp"
#include "drplan/transfer.hpp"
