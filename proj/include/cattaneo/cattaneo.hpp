#pragma once

#include "cattaneo/coefficient.hpp"
#include "cattaneo/diagnostics.hpp"
#include "cattaneo/discretization.hpp"
#include "cattaneo/grid.hpp"
#include "cattaneo/model.hpp"
#include "cattaneo/spectral.hpp"
#include "cattaneo/stationary_oracle.hpp"
#include "cattaneo/timestepper.hpp"
