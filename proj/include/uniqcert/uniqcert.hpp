#ifndef UNIQCERT_UNIQCERT_HPP
#define UNIQCERT_UNIQCERT_HPP

#include "uniqcert/certify.hpp"
#include "uniqcert/config.hpp"
#include "uniqcert/driver.hpp"
#include "uniqcert/errors.hpp"
#include "uniqcert/expr.hpp"
#include "uniqcert/grid.hpp"
#include "uniqcert/laplacian.hpp"
#include "uniqcert/nemytskii.hpp"
#include "uniqcert/operators.hpp"
#include "uniqcert/parallel.hpp"
#include "uniqcert/probe.hpp"
#include "uniqcert/report.hpp"
#include "uniqcert/rng.hpp"
#include "uniqcert/solve.hpp"

#endif  // UNIQCERT_UNIQCERT_HPP
