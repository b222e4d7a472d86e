#pragma once

#include "tpeuler/errors.hpp"
#include "tpeuler/gas.hpp"
#include "tpeuler/grid.hpp"
#include "tpeuler/forcing.hpp"
#include "tpeuler/riemann.hpp"
#include "tpeuler/layer.hpp"
#include "tpeuler/diagnostics.hpp"
#include "tpeuler/scheme.hpp"
#include "tpeuler/period_map.hpp"
