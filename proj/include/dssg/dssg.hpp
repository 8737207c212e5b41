#pragma once

#include "dssg/catalog.hpp"
#include "dssg/diagnostics.hpp"
#include "dssg/error.hpp"
#include "dssg/harness/baseline.hpp"
#include "dssg/harness/compare.hpp"
#include "dssg/harness/config.hpp"
#include "dssg/harness/experiment.hpp"
#include "dssg/linalg.hpp"
#include "dssg/network.hpp"
#include "dssg/objectives.hpp"
#include "dssg/oracle.hpp"
#include "dssg/random.hpp"
#include "dssg/solver.hpp"
#include "dssg/state.hpp"
