#pragma once

#include "bayesoed/consistency.hpp"
#include "bayesoed/design.hpp"
#include "bayesoed/eig.hpp"
#include "bayesoed/errors.hpp"
#include "bayesoed/gaussian.hpp"
#include "bayesoed/inverse_problem.hpp"
#include "bayesoed/lowrank.hpp"
#include "bayesoed/numerics.hpp"
#include "bayesoed/random.hpp"
#include "bayesoed/spd_matrix.hpp"
