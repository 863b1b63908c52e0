#pragma once

#include "windflex/common.hpp"
#include "windflex/config.hpp"
#include "windflex/csv.hpp"
#include "windflex/defaults.hpp"
#include "windflex/dispatch.hpp"
#include "windflex/errors.hpp"
#include "windflex/fixtures.hpp"
#include "windflex/load_model.hpp"
#include "windflex/params_io.hpp"
#include "windflex/rng.hpp"
#include "windflex/seasonality.hpp"
#include "windflex/stats.hpp"
#include "windflex/sweep.hpp"
#include "windflex/temperature_model.hpp"
#include "windflex/wind_model.hpp"
