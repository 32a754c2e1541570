#pragma once

#include "hurstlab/core.hpp"
#include "hurstlab/estimators.hpp"
#include "hurstlab/evalharness.hpp"
#include "hurstlab/fgn.hpp"
#include "hurstlab/series_io.hpp"
#include "hurstlab/traces.hpp"
