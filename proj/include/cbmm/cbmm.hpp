#pragma once

#include "cbmm/bettor.hpp"
#include "cbmm/core.hpp"
#include "cbmm/data.hpp"
#include "cbmm/errors.hpp"
#include "cbmm/harness.hpp"
#include "cbmm/metrics.hpp"
#include "cbmm/problems.hpp"
#include "cbmm/simplex_bettor.hpp"
#include "cbmm/solvers.hpp"
