#pragma once

#include "rpnc/mac/end_node.hpp"
#include "rpnc/mac/relay.hpp"
