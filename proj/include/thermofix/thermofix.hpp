#pragma once

// =============================================================================
// Umbrella header
// =============================================================================

#include "thermofix/bench.hpp"
#include "thermofix/convergence.hpp"
#include "thermofix/governor.hpp"
#include "thermofix/io_util.hpp"
#include "thermofix/mimo.hpp"
#include "thermofix/model.hpp"
#include "thermofix/model_io.hpp"
#include "thermofix/scenario.hpp"
#include "thermofix/siso.hpp"
#include "thermofix/trajectory.hpp"
