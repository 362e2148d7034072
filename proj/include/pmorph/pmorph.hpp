#pragma once

// Umbrella header for the padic-morphogen library.

#include "pmorph/clusters.hpp"
#include "pmorph/grid.hpp"
#include "pmorph/heat_kernel.hpp"
#include "pmorph/kinetics.hpp"
#include "pmorph/modes.hpp"
#include "pmorph/padic.hpp"
#include "pmorph/rational.hpp"
#include "pmorph/simulate.hpp"
#include "pmorph/threading.hpp"
#include "pmorph/turing.hpp"
#include "pmorph/vladimirov.hpp"
#include "pmorph/wavelets.hpp"

#ifndef PMORPH_VERSION
#define PMORPH_VERSION "0.1.0"
#endif
