#pragma once

#include "arith.hpp"
#include "asymptotics.hpp"
#include "counting.hpp"
#include "densities.hpp"
#include "errors.hpp"
#include "form_expr.hpp"
#include "hecke_module.hpp"
#include "hecke_ops.hpp"
#include "linalg.hpp"
#include "parallel.hpp"
#include "qseries.hpp"
#include "weight_basis.hpp"
