#pragma once

// Umbrella header: simulator and analysis toolkit for two mechanically
// coupled optomechanical cavities with dispersive and dissipative coupling.

#include "epom/analysis.hpp"
#include "epom/csv.hpp"
#include "epom/integrate.hpp"
#include "epom/model.hpp"
#include "epom/scans.hpp"
#include "epom/sextic.hpp"
#include "epom/spectrum.hpp"
#include "epom/steady.hpp"
#include "epom/version.hpp"
