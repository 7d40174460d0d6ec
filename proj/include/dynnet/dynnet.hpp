#pragma once

// Bayesian dynamic latent-space network model with time-varying edge
// predictors: Polya-gamma-augmented Gibbs sampling over Gaussian-process
// baseline, coefficient and latent-coordinate curves, plus the data
// pipeline for co-movement networks and cooperation covariates.

#include "dynnet/common.hpp"
#include "dynnet/csv.hpp"
#include "dynnet/diagnostics.hpp"
#include "dynnet/gibbs.hpp"
#include "dynnet/ingest.hpp"
#include "dynnet/io.hpp"
#include "dynnet/kernel.hpp"
#include "dynnet/model.hpp"
#include "dynnet/polya_gamma.hpp"
#include "dynnet/rng.hpp"
#include "dynnet/types.hpp"
