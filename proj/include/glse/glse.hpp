#pragma once

#include "glse/aug.hpp"
#include "glse/channel.hpp"
#include "glse/config.hpp"
#include "glse/errors.hpp"
#include "glse/gamp.hpp"
#include "glse/oracle.hpp"
#include "glse/run_config.hpp"
#include "glse/sim.hpp"
#include "glse/thresholding.hpp"
#include "glse/thresholding_numeric.hpp"
#include "glse/tuning.hpp"
#include "glse/validation.hpp"
