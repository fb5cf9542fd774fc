#pragma once
// Convenience umbrella for the whole library.

#include "structbreak/chow.hpp"
#include "structbreak/cli.hpp"
#include "structbreak/common.hpp"
#include "structbreak/confidence.hpp"
#include "structbreak/critical_values.hpp"
#include "structbreak/csv_io.hpp"
#include "structbreak/design.hpp"
#include "structbreak/dynamic_program.hpp"
#include "structbreak/estimate.hpp"
#include "structbreak/hypothesis.hpp"
#include "structbreak/model_spec.hpp"
#include "structbreak/ols.hpp"
#include "structbreak/panel_data.hpp"
#include "structbreak/partition.hpp"
#include "structbreak/rng.hpp"
#include "structbreak/segment_costs.hpp"
#include "structbreak/simulate.hpp"
