#pragma once

#include "safenav/cbf.hpp"
#include "safenav/clf.hpp"
#include "safenav/controller.hpp"
#include "safenav/model.hpp"
#include "safenav/qp.hpp"
#include "safenav/scenario_io.hpp"
#include "safenav/sim.hpp"
