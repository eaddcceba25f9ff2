#pragma once

#include "adiabat/adiabaticity.hpp"
#include "adiabat/config.hpp"
#include "adiabat/eigensolver.hpp"
#include "adiabat/experiments.hpp"
#include "adiabat/field_io.hpp"
#include "adiabat/grid.hpp"
#include "adiabat/metrics.hpp"
#include "adiabat/microwells.hpp"
#include "adiabat/potentials.hpp"
#include "adiabat/propagator.hpp"
#include "adiabat/rng.hpp"
#include "adiabat/svg.hpp"
