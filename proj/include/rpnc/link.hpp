#pragma once

#include "rpnc/link/crc32.hpp"
#include "rpnc/link/hexdump.hpp"
#include "rpnc/link/packet.hpp"
