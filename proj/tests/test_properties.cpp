#include "properties.hpp"

#include "doctest.h"

using namespace properties;

// Each suite runs a reduced case count here; the acceptance binary runs the
// full thousand per suite.

TEST_CASE("random circuits preserve norm") {
  const PropertyResult r = norm_preservation(101, 200);
  INFO(r.first_failure);
  CHECK(r.failures == 0);
  CHECK(r.cases == 200);
}

TEST_CASE("dilated measurements match direct outcome distributions") {
  const PropertyResult r = dilation_equivalence(202, 200);
  INFO(r.first_failure);
  CHECK(r.failures == 0);
}

TEST_CASE("agent views of shared gates stay consistent") {
  const PropertyResult r = view_consistency(303, 200);
  INFO(r.first_failure);
  CHECK(r.failures == 0);
}

TEST_CASE("reports are byte-deterministic across repeated runs") {
  const PropertyResult r = report_determinism(404, 200);
  INFO(r.first_failure);
  CHECK(r.failures == 0);
}
