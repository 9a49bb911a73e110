#pragma once

#include "qbandit/analysis.hpp"
#include "qbandit/bounds.hpp"
#include "qbandit/core.hpp"
#include "qbandit/experiment.hpp"
#include "qbandit/matching.hpp"
#include "qbandit/policies.hpp"
#include "qbandit/random.hpp"
#include "qbandit/sim.hpp"
#include "qbandit/verify.hpp"
