#pragma once

#include "qvortex/grid.hpp"
#include "qvortex/potential.hpp"
#include "qvortex/seeds.hpp"
#include "qvortex/elliptic.hpp"
#include "qvortex/energy.hpp"
#include "qvortex/seed_energy.hpp"
#include "qvortex/diagnostics.hpp"
#include "qvortex/minimize.hpp"
#include "qvortex/io.hpp"
#include "qvortex/run.hpp"
