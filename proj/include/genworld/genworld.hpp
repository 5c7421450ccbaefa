// genworld/genworld.hpp
//
// Everything except image_io.hpp, which needs libpng.
#pragma once

#include "genworld/core.hpp"
#include "genworld/daedalus.hpp"
#include "genworld/gaia.hpp"
#include "genworld/hephaestus.hpp"
#include "genworld/memory.hpp"
#include "genworld/moira.hpp"
#include "genworld/noise.hpp"
#include "genworld/oracle.hpp"
#include "genworld/pathing.hpp"
#include "genworld/protocol.hpp"
#include "genworld/pygmalion.hpp"
#include "genworld/routine.hpp"
#include "genworld/server.hpp"
#include "genworld/simulation.hpp"
#include "genworld/wordofgod.hpp"
#include "genworld/world.hpp"
