#pragma once

#include "qrx/constellation.hpp"
#include "qrx/error.hpp"
#include "qrx/helstrom.hpp"
#include "qrx/jacobi.hpp"
#include "qrx/montecarlo.hpp"
#include "qrx/optimizer.hpp"
#include "qrx/phase_noise.hpp"
#include "qrx/receivers.hpp"
