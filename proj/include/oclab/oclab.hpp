#pragma once

// Numerical laboratory for limits of nonlinear functionals along
// oscillating/concentrating sequences: parametrized-measure data model,
// exact piecewise quadrature, representation-formula checks, quasiconvexity
// tools, and the scenario runner.

#include "oclab/common.hpp"
#include "oclab/compactify.hpp"
#include "oclab/families.hpp"
#include "oclab/limits.hpp"
#include "oclab/lsc.hpp"
#include "oclab/measures.hpp"
#include "oclab/parallel.hpp"
#include "oclab/quadrature.hpp"
#include "oclab/quasiconvex.hpp"
#include "oclab/represent.hpp"
#include "oclab/scenario.hpp"
#include "oclab/triples.hpp"
