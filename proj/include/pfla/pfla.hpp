#pragma once

#include "pfla/automaton.hpp"
#include "pfla/beta.hpp"
#include "pfla/env.hpp"
#include "pfla/exact.hpp"
#include "pfla/experiment.hpp"
#include "pfla/grid_estimator.hpp"
#include "pfla/mc.hpp"
#include "pfla/report.hpp"
#include "pfla/rng.hpp"
#include "pfla/tuning.hpp"
