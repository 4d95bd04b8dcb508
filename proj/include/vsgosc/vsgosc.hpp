#pragma once

#include "vsgosc/config.hpp"
#include "vsgosc/controllers.hpp"
#include "vsgosc/engine.hpp"
#include "vsgosc/equivalent_circuit.hpp"
#include "vsgosc/errors.hpp"
#include "vsgosc/metrics.hpp"
#include "vsgosc/model.hpp"
#include "vsgosc/network.hpp"
#include "vsgosc/polynomial.hpp"
#include "vsgosc/small_signal.hpp"
#include "vsgosc/transfer_function.hpp"
