#pragma once

#include "robex/dataset.hpp"
#include "robex/evaluation.hpp"
#include "robex/features.hpp"
#include "robex/matrix.hpp"
#include "robex/reporting.hpp"
#include "robex/stats.hpp"
#include "robex/svr.hpp"
#include "robex/svr_io.hpp"
