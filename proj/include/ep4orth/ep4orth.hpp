#pragma once

#include "ep4orth/types.hpp"
#include "ep4orth/random.hpp"
#include "ep4orth/objective.hpp"
#include "ep4orth/simplex.hpp"
#include "ep4orth/manifold.hpp"
#include "ep4orth/penalty.hpp"
#include "ep4orth/rounding.hpp"
#include "ep4orth/gradient_projection.hpp"
#include "ep4orth/newton.hpp"
#include "ep4orth/driver.hpp"
#include "ep4orth/problems.hpp"
#include "ep4orth/io.hpp"
