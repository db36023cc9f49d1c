#pragma once

#include "clockforge/error.hpp"
#include "clockforge/rational.hpp"
#include "clockforge/timerset.hpp"
#include "clockforge/timers_io.hpp"
#include "clockforge/clustering.hpp"
#include "clockforge/clockgraph.hpp"
#include "clockforge/description_io.hpp"
#include "clockforge/configsearch.hpp"
#include "clockforge/report.hpp"
