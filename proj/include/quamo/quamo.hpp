#pragma once

#include "quamo/ablation.hpp"
#include "quamo/control_net.hpp"
#include "quamo/controller.hpp"
#include "quamo/error.hpp"
#include "quamo/integrators.hpp"
#include "quamo/metrics.hpp"
#include "quamo/motion_io.hpp"
#include "quamo/quaternion.hpp"
#include "quamo/random.hpp"
#include "quamo/runner.hpp"
#include "quamo/skeleton.hpp"
#include "quamo/synth.hpp"
#include "quamo/tracker.hpp"
#include "quamo/tune.hpp"
