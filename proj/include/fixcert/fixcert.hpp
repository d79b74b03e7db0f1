#pragma once

#include "fixcert/condition.hpp"
#include "fixcert/contraction.hpp"
#include "fixcert/expr.hpp"
#include "fixcert/gauge.hpp"
#include "fixcert/problem.hpp"
#include "fixcert/report.hpp"
#include "fixcert/rng.hpp"
#include "fixcert/solver.hpp"
#include "fixcert/space.hpp"
#include "fixcert/version.hpp"
