#pragma once

// Umbrella header.

#include "coupled_crn/analysis.hpp"
#include "coupled_crn/couplings.hpp"
#include "coupled_crn/csv.hpp"
#include "coupled_crn/engines.hpp"
#include "coupled_crn/ensemble.hpp"
#include "coupled_crn/errors.hpp"
#include "coupled_crn/model_io.hpp"
#include "coupled_crn/models.hpp"
#include "coupled_crn/network.hpp"
#include "coupled_crn/sensitivity.hpp"
#include "coupled_crn/stats.hpp"
#include "coupled_crn/streams.hpp"
#include "coupled_crn/version.hpp"
