#pragma once

#include "rpnc/sim/channel.hpp"
#include "rpnc/sim/clock.hpp"
#include "rpnc/sim/config.hpp"
#include "rpnc/sim/engine.hpp"
#include "rpnc/sim/event_queue.hpp"
#include "rpnc/sim/latency.hpp"
#include "rpnc/sim/metrics.hpp"
#include "rpnc/sim/traffic.hpp"
#include "rpnc/sim/waveform.hpp"
