#pragma once

#include "isac/channel.hpp"
#include "isac/comm.hpp"
#include "isac/geometry.hpp"
#include "isac/grid.hpp"
#include "isac/harness.hpp"
#include "isac/pilot.hpp"
#include "isac/rng.hpp"
#include "isac/sensing.hpp"
#include "isac/sequences.hpp"
#include "isac/transforms.hpp"
