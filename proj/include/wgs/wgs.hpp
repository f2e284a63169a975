#pragma once

#include "wgs/analytic.hpp"
#include "wgs/errors.hpp"
#include "wgs/exact.hpp"
#include "wgs/io.hpp"
#include "wgs/lattice.hpp"
#include "wgs/metrics.hpp"
#include "wgs/numerics.hpp"
#include "wgs/parallel.hpp"
#include "wgs/rdm.hpp"
#include "wgs/series.hpp"
#include "wgs/version.hpp"
