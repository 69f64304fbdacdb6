#include <catch_amalgamated.hpp>
#include "qcert/io.hpp"
using namespace qcert;
