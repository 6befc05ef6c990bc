#pragma once

#include "zeno/analysis.hpp"
#include "zeno/config.hpp"
#include "zeno/csv.hpp"
#include "zeno/ensemble.hpp"
#include "zeno/master_equation.hpp"
#include "zeno/noise.hpp"
#include "zeno/protocols.hpp"
#include "zeno/qubit.hpp"
#include "zeno/rng.hpp"
#include "zeno/runner.hpp"
