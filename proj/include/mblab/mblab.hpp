// mblab.hpp
// Umbrella header.

#pragma once

#include "mblab/config.hpp"
#include "mblab/functionals.hpp"
#include "mblab/grid.hpp"
#include "mblab/laminations.hpp"
#include "mblab/lattice.hpp"
#include "mblab/numbers.hpp"
#include "mblab/potential.hpp"
#include "mblab/report.hpp"
#include "mblab/solvers.hpp"
#include "mblab/verify.hpp"
