#pragma once

#include "qista/bench.hpp"
#include "qista/errors.hpp"
#include "qista/instance.hpp"
#include "qista/io.hpp"
#include "qista/layer_params.hpp"
#include "qista/metrics.hpp"
#include "qista/prox.hpp"
#include "qista/random.hpp"
#include "qista/solvers.hpp"
#include "qista/spectral.hpp"
#include "qista/types.hpp"
