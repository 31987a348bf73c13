#pragma once

#include "rpnc/timing/hw_time.hpp"
#include "rpnc/timing/slot_schedule.hpp"
