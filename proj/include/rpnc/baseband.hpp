#pragma once

#include "rpnc/baseband/correlator.hpp"
#include "rpnc/baseband/csi.hpp"
#include "rpnc/baseband/demap.hpp"
#include "rpnc/baseband/fft.hpp"
#include "rpnc/baseband/fractional_delay.hpp"
#include "rpnc/baseband/framesync.hpp"
#include "rpnc/baseband/golden.hpp"
#include "rpnc/baseband/ofdm_params.hpp"
#include "rpnc/baseband/preamble.hpp"
#include "rpnc/baseband/sample_stream.hpp"
