#pragma once

// Umbrella header: the full star-graph spectral toolkit.

#include "starspec/bessel.hpp"
#include "starspec/eigenpairs.hpp"
#include "starspec/galerkin.hpp"
#include "starspec/geometry.hpp"
#include "starspec/inequality.hpp"
#include "starspec/kernel.hpp"
#include "starspec/optimizer.hpp"
#include "starspec/parallel.hpp"
#include "starspec/quadrature.hpp"
#include "starspec/solver.hpp"
