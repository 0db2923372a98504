#pragma once

// Umbrella header for the heritability-inference toolkit.

#include "herit/bench.hpp"
#include "herit/boosther.hpp"
#include "herit/common.hpp"
#include "herit/core.hpp"
#include "herit/eigenprism.hpp"
#include "herit/elastic_net.hpp"
#include "herit/estimate.hpp"
#include "herit/genotype.hpp"
#include "herit/mle.hpp"
#include "herit/moments.hpp"
#include "herit/scaled_lasso.hpp"
#include "herit/simulate.hpp"
#include "herit/spectral.hpp"
#include "herit/stats.hpp"
