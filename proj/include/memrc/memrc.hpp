#pragma once

#include "memrc/config.hpp"
#include "memrc/device.hpp"
#include "memrc/error.hpp"
#include "memrc/experiment.hpp"
#include "memrc/learn.hpp"
#include "memrc/network.hpp"
#include "memrc/psd.hpp"
#include "memrc/reservoir.hpp"
#include "memrc/seed.hpp"
#include "memrc/stats.hpp"
#include "memrc/tasks.hpp"
#include "memrc/text.hpp"
#include "memrc/topology.hpp"
