#pragma once

// Umbrella header for the PC-LS process library.

#include "pcls/error.hpp"
#include "pcls/excov.hpp"
#include "pcls/linalg.hpp"
#include "pcls/model.hpp"
#include "pcls/montecarlo.hpp"
#include "pcls/parallel.hpp"
#include "pcls/partition.hpp"
#include "pcls/pc_component.hpp"
#include "pcls/spectral.hpp"
#include "pcls/stationary.hpp"
