#pragma once

#include "sketchsp/bench.hpp"
#include "sketchsp/dense.hpp"
#include "sketchsp/dense_io.hpp"
#include "sketchsp/error.hpp"
#include "sketchsp/generators.hpp"
#include "sketchsp/lsqr.hpp"
#include "sketchsp/matrix_market.hpp"
#include "sketchsp/perf_model.hpp"
#include "sketchsp/rng.hpp"
#include "sketchsp/sap.hpp"
#include "sketchsp/sketch.hpp"
#include "sketchsp/sparse.hpp"
