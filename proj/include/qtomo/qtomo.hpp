#pragma once

// Single include for the whole library: CT geometry, sparse projection,
// sinogram preprocessing, QUBO assembly, solvers, the classical baseline,
// and file formats.

#include "qtomo/errors.hpp"
#include "qtomo/rng.hpp"
#include "qtomo/image.hpp"
#include "qtomo/geometry.hpp"
#include "qtomo/phantom.hpp"
#include "qtomo/projection.hpp"
#include "qtomo/preprocess.hpp"
#include "qtomo/qubo.hpp"
#include "qtomo/solver.hpp"
#include "qtomo/baseline.hpp"
#include "qtomo/io.hpp"
