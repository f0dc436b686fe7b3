#pragma once

#include "carnot/analysis.hpp"
#include "carnot/catalog.hpp"
#include "carnot/connection.hpp"
#include "carnot/dynamics.hpp"
#include "carnot/error.hpp"
#include "carnot/expression.hpp"
#include "carnot/group_spec.hpp"
#include "carnot/lie_algebra.hpp"
#include "carnot/polynomial.hpp"
#include "carnot/rational.hpp"
#include "carnot/reduction.hpp"
#include "carnot/report.hpp"
