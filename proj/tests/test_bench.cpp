#include <catch_amalgamated.hpp>
#include "qcert/bench.hpp"
using namespace qcert;
