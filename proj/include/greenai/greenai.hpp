#pragma once

// Umbrella header for the greenai dynamic model selection library.

#include "greenai/bench.hpp"
#include "greenai/cascade.hpp"
#include "greenai/classifier.hpp"
#include "greenai/dataset.hpp"
#include "greenai/decision_tree.hpp"
#include "greenai/energy.hpp"
#include "greenai/feedforward_net.hpp"
#include "greenai/metrics.hpp"
#include "greenai/router.hpp"
#include "greenai/serialize.hpp"
#include "greenai/softmax_regressor.hpp"
