#pragma once

#include "graspe/core/matrix.hpp"
#include "graspe/core/rng.hpp"
#include "graspe/core/types.hpp"
#include "graspe/enc/encoders.hpp"
#include "graspe/fus/graph.hpp"
#include "graspe/fus/gnn.hpp"
#include "graspe/fus/pipeline.hpp"
#include "graspe/fus/train.hpp"
#include "graspe/plan/dwa.hpp"
#include "graspe/rel/cloud.hpp"
#include "graspe/rel/image.hpp"
#include "graspe/run/config.hpp"
#include "graspe/run/eval.hpp"
#include "graspe/run/io.hpp"
#include "graspe/run/plots.hpp"
#include "graspe/run/record.hpp"
#include "graspe/run/training.hpp"
#include "graspe/sim/episode.hpp"
#include "graspe/sim/sensors.hpp"
#include "graspe/sim/terrain.hpp"
