#pragma once

#include "gridreduce/errors.hpp"
#include "gridreduce/graph.hpp"
#include "gridreduce/random_graph.hpp"
#include "gridreduce/network.hpp"
#include "gridreduce/power_model.hpp"
#include "gridreduce/control.hpp"
#include "gridreduce/simulation.hpp"
#include "gridreduce/scenario.hpp"
#include "gridreduce/output.hpp"
#include "gridreduce/runner.hpp"
