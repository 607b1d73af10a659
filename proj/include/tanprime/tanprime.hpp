#pragma once

#include "tanprime/error.hpp"
#include "tanprime/numeric.hpp"
#include "tanprime/parallel.hpp"
#include "tanprime/scales.hpp"
#include "tanprime/tangent_phase.hpp"
#include "tanprime/prime_window.hpp"
#include "tanprime/smoothing.hpp"
#include "tanprime/exp_sums.hpp"
#include "tanprime/witness_search.hpp"
#include "tanprime/report.hpp"
#include "tanprime/harness.hpp"
#include "tanprime/battery.hpp"
