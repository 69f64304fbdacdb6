#include <catch_amalgamated.hpp>
#include "generators.hpp"
using namespace qcert;
