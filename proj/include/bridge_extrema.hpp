#pragma once

#include "bridge_extrema/accuracy.hpp"
#include "bridge_extrema/distributions.hpp"
#include "bridge_extrema/gof.hpp"
#include "bridge_extrema/laplace.hpp"
#include "bridge_extrema/mc.hpp"
#include "bridge_extrema/rng.hpp"
