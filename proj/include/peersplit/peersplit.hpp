#pragma once

#include "peersplit/aggregation.hpp"
#include "peersplit/core_model.hpp"
#include "peersplit/error.hpp"
#include "peersplit/fixed_point.hpp"
#include "peersplit/optimize.hpp"
#include "peersplit/panel_io.hpp"
#include "peersplit/prioritization.hpp"
