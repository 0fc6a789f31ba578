#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pmkt/builder.hpp"
#include "pmkt/demand.hpp"
#include "pmkt/diagnostics.hpp"
#include "pmkt/enumerate.hpp"
#include "pmkt/equilibrium.hpp"
#include "pmkt/io.hpp"
#include "pmkt/lcs.hpp"
#include "pmkt/matching.hpp"
#include "pmkt/structured.hpp"
#include "pmkt/validate.hpp"

TEST_CASE("links") { CHECK(true); }
