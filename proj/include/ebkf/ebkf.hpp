#pragma once

// Empirical-Bayes improvement of Kalman-filter estimators for Gaussian
// observation series, with the sparse-shock simulation benchmark and the
// Poisson-count cross-validation pipeline.

#include "ebkf/benchmark.hpp"
#include "ebkf/conditioning.hpp"
#include "ebkf/corrector.hpp"
#include "ebkf/errors.hpp"
#include "ebkf/filter_output.hpp"
#include "ebkf/improve.hpp"
#include "ebkf/io.hpp"
#include "ebkf/kalman.hpp"
#include "ebkf/kernel.hpp"
#include "ebkf/mle.hpp"
#include "ebkf/poisson.hpp"
#include "ebkf/rng.hpp"
#include "ebkf/series.hpp"
#include "ebkf/simulate.hpp"
#include "ebkf/state_space.hpp"
