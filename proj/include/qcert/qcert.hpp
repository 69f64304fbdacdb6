#pragma once

// Umbrella header for the QCQP global-optimality certification toolkit.

#include "qcert/linalg.hpp"
#include "qcert/qcqp.hpp"
#include "qcert/conic.hpp"
#include "qcert/solver.hpp"
#include "qcert/structural.hpp"
#include "qcert/slater.hpp"
#include "qcert/certify.hpp"
#include "qcert/dnn.hpp"
#include "qcert/bench.hpp"
#include "qcert/io.hpp"
