#pragma once

#include "iptvsim/common.hpp"
#include "iptvsim/config.hpp"
#include "iptvsim/engine.hpp"
#include "iptvsim/mac.hpp"
#include "iptvsim/metrics.hpp"
#include "iptvsim/outcome.hpp"
#include "iptvsim/phy.hpp"
#include "iptvsim/propagation.hpp"
#include "iptvsim/report_io.hpp"
#include "iptvsim/runner.hpp"
#include "iptvsim/traffic.hpp"
