// Umbrella header.
#pragma once

#include "icm/bitmatrix.hpp"
#include "icm/blocks.hpp"
#include "icm/core.hpp"
#include "icm/dynamics.hpp"
#include "icm/error.hpp"
#include "icm/generosity.hpp"
#include "icm/graph.hpp"
#include "icm/ingest.hpp"
#include "icm/io.hpp"
