#pragma once

#include "tgf/app.hpp"
#include "tgf/basis.hpp"
#include "tgf/config.hpp"
#include "tgf/ensemble.hpp"
#include "tgf/errors.hpp"
#include "tgf/estimators.hpp"
#include "tgf/grid.hpp"
#include "tgf/integrator.hpp"
#include "tgf/noise.hpp"
#include "tgf/norms.hpp"
#include "tgf/operators.hpp"
#include "tgf/params.hpp"
#include "tgf/rng.hpp"
#include "tgf/state.hpp"
