#pragma once

// Umbrella header: exact and differentiable Euler Characteristic Transforms
// of geometric simplicial complexes, plus the gradient-descent drivers that
// learn filtration directions or point coordinates from a target transform.

#include "ectkit/complex.hpp"
#include "ectkit/ect_diff.hpp"
#include "ectkit/ect_exact.hpp"
#include "ectkit/errors.hpp"
#include "ectkit/filtration.hpp"
#include "ectkit/io.hpp"
#include "ectkit/optimize.hpp"
#include "ectkit/platonic.hpp"
#include "ectkit/sampling.hpp"
