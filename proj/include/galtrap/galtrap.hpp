#pragma once

#include "galtrap/errors.hpp"
#include "galtrap/mode.hpp"
#include "galtrap/field.hpp"
#include "galtrap/parallel.hpp"
#include "galtrap/nonlinear.hpp"
#include "galtrap/grid_oracle.hpp"
#include "galtrap/random.hpp"
#include "galtrap/io.hpp"
#include "galtrap/lattice.hpp"
#include "galtrap/trapping.hpp"
#include "galtrap/flow.hpp"
