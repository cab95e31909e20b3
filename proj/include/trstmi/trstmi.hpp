#pragma once

// Umbrella header: low-coherence complex line configurations via annealed
// log-sum-exp smoothing and a Steihaug trust-region solver, plus bounds,
// certificates, an alternating-projection baseline, and MISO codebook
// evaluation.

#include "trstmi/analysis.hpp"
#include "trstmi/baseline.hpp"
#include "trstmi/beamforming.hpp"
#include "trstmi/frame.hpp"
#include "trstmi/io.hpp"
#include "trstmi/rng.hpp"
#include "trstmi/smoothing.hpp"
#include "trstmi/solver.hpp"
#include "trstmi/trust_region.hpp"
