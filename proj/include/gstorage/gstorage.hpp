#pragma once

#include "asymptotics.hpp"
#include "config.hpp"
#include "correlation.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "harness.hpp"
#include "horizon.hpp"
#include "normal.hpp"
#include "parallel.hpp"
#include "path.hpp"
#include "pickands.hpp"
#include "process.hpp"
#include "rng.hpp"
#include "storage.hpp"
#include "validation.hpp"
#include "variance.hpp"
