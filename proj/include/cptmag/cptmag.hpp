#pragma once

// Umbrella header: the full simulation + estimation toolkit.

#include "cptmag/bounds.hpp"
#include "cptmag/config.hpp"
#include "cptmag/cpt_model.hpp"
#include "cptmag/csv.hpp"
#include "cptmag/errors.hpp"
#include "cptmag/estimators.hpp"
#include "cptmag/experiment.hpp"
#include "cptmag/gauss_hermite.hpp"
#include "cptmag/lindblad.hpp"
#include "cptmag/ou_process.hpp"
#include "cptmag/photon_stream.hpp"
#include "cptmag/posterior_grid.hpp"
#include "cptmag/rng.hpp"
#include "cptmag/units.hpp"
