#pragma once

#include "gdfl/core.hpp"
#include "gdfl/qmc.hpp"
#include "gdfl/continuous.hpp"
#include "gdfl/discrete.hpp"
#include "gdfl/solvers.hpp"
#include "gdfl/problems.hpp"
#include "gdfl/bench.hpp"
