#pragma once

#include "localspin/bench.hpp"
#include "localspin/error.hpp"
#include "localspin/generators.hpp"
#include "localspin/instance.hpp"
#include "localspin/oracle.hpp"
#include "localspin/parallel.hpp"
#include "localspin/rng.hpp"
#include "localspin/solver.hpp"
#include "localspin/stats.hpp"
#include "localspin/tuner.hpp"
