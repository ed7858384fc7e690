#pragma once

#include "pathid/fock.hpp"
#include "pathid/elements.hpp"
#include "pathid/experiment.hpp"
#include "pathid/analysis.hpp"
#include "pathid/coherence.hpp"
#include "pathid/dsl.hpp"
#include "pathid/search.hpp"
