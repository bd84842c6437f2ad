#pragma once

#include "fcsmpcc/analysis.hpp"
#include "fcsmpcc/config.hpp"
#include "fcsmpcc/inverter.hpp"
#include "fcsmpcc/machine.hpp"
#include "fcsmpcc/mpcc.hpp"
#include "fcsmpcc/multistep.hpp"
#include "fcsmpcc/sim.hpp"
#include "fcsmpcc/speed_loop.hpp"
#include "fcsmpcc/trace.hpp"
#include "fcsmpcc/transforms.hpp"
#include "fcsmpcc/version.hpp"
