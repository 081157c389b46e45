#pragma once

#include "jacobi_scatter/errors.hpp"
#include "jacobi_scatter/quadrature.hpp"
#include "jacobi_scatter/roots.hpp"
#include "jacobi_scatter/background.hpp"
#include "jacobi_scatter/perturbation.hpp"
#include "jacobi_scatter/krein.hpp"
#include "jacobi_scatter/toda.hpp"
#include "jacobi_scatter/io.hpp"
