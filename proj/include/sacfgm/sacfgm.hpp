#pragma once

// Umbrella header for the stochastic AC-FGM library.

#include "sacfgm/errors.hpp"
#include "sacfgm/geometry.hpp"
#include "sacfgm/problem.hpp"
#include "sacfgm/problem_io.hpp"
#include "sacfgm/generators.hpp"
#include "sacfgm/sampling.hpp"
#include "sacfgm/estimators.hpp"
#include "sacfgm/schedule.hpp"
#include "sacfgm/optimizer.hpp"
#include "sacfgm/baselines.hpp"
#include "sacfgm/records.hpp"
#include "sacfgm/analysis.hpp"
#include "sacfgm/config.hpp"
#include "sacfgm/plotdata.hpp"
#include "sacfgm/experiment.hpp"
