#pragma once

// Umbrella header.

#include "regen/bounds.hpp"
#include "regen/coupling.hpp"
#include "regen/distribution_json.hpp"
#include "regen/distributions.hpp"
#include "regen/errors.hpp"
#include "regen/parallel.hpp"
#include "regen/quadrature.hpp"
#include "regen/random.hpp"
#include "regen/renewal.hpp"
#include "regen/solve.hpp"
#include "regen/stats.hpp"
#include "regen/verify.hpp"
