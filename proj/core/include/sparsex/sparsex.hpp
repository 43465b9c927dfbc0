#pragma once

#include "sparsex/bench.hpp"
#include "sparsex/linalg.hpp"
#include "sparsex/matrix_io.hpp"
#include "sparsex/rng.hpp"
#include "sparsex/selectors.hpp"
#include "sparsex/solvers.hpp"
#include "sparsex/stopping.hpp"
#include "sparsex/synth.hpp"
