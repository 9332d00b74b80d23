#pragma once

#include "forchfem/analysis.hpp"
#include "forchfem/cg.hpp"
#include "forchfem/config.hpp"
#include "forchfem/core.hpp"
#include "forchfem/fem.hpp"
#include "forchfem/forchheimer.hpp"
#include "forchfem/harness.hpp"
#include "forchfem/mesh.hpp"
#include "forchfem/problems.hpp"
#include "forchfem/quadrature.hpp"
#include "forchfem/solver.hpp"
#include "forchfem/sparse.hpp"
