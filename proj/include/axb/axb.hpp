#pragma once

// Umbrella header: photon-axion mixing indices, gradient-field ray
// tracing, cavity bifurcation statistics, and beam-profile metrics.

#include "axb/beam_profile.hpp"
#include "axb/cavity.hpp"
#include "axb/errors.hpp"
#include "axb/field_ray.hpp"
#include "axb/io.hpp"
#include "axb/mixing.hpp"
#include "axb/scenario.hpp"
#include "axb/units.hpp"
#include "axb/version.hpp"
