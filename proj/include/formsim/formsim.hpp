#pragma once

#include "formsim/configuration.hpp"
#include "formsim/control.hpp"
#include "formsim/equilibria.hpp"
#include "formsim/graph.hpp"
#include "formsim/integrate.hpp"
#include "formsim/rng.hpp"
#include "formsim/runner.hpp"
#include "formsim/scenario.hpp"
