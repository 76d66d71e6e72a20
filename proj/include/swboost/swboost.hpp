#pragma once

// Stage-wise multi-class boosting: decision-stump weak learners selected by
// the most violated multi-class margin constraint, per-round coefficients
// from a small bound-constrained solve, exponential or logistic loss.

#include "swboost/booster.hpp"
#include "swboost/boxsolver.hpp"
#include "swboost/common.hpp"
#include "swboost/dataset.hpp"
#include "swboost/experiments.hpp"
#include "swboost/losses.hpp"
#include "swboost/model.hpp"
#include "swboost/oracles.hpp"
#include "swboost/stumps.hpp"
