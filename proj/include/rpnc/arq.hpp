#pragma once

#include "rpnc/arq/endpoint.hpp"
#include "rpnc/arq/receiver.hpp"
#include "rpnc/arq/rtt.hpp"
#include "rpnc/arq/sender.hpp"
#include "rpnc/arq/seq.hpp"
