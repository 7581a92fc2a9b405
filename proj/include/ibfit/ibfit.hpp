#pragma once

#include "ibfit/calendar.hpp"
#include "ibfit/distributions.hpp"
#include "ibfit/error.hpp"
#include "ibfit/fit.hpp"
#include "ibfit/ingestion.hpp"
#include "ibfit/model_selection.hpp"
#include "ibfit/network.hpp"
#include "ibfit/parallel.hpp"
#include "ibfit/pipeline.hpp"
#include "ibfit/random.hpp"
#include "ibfit/synthgen.hpp"
#include "ibfit/tail_selection.hpp"
