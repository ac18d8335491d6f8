// Margin-schedule suite: exact endpoint behavior of the chunk-width margin,
// the stage mapping, and schedule validation.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "circlelab/errors.hpp"
#include "circlelab/margin.hpp"
#include "test_support.hpp"

using namespace circlelab;
using testsupport::near;

TEST_CASE("chunk margin hits both endpoints exactly") {
  ChunkMarginSpec spec;
  spec.m0 = 0.40;
  spec.lambda = 0.25;
  spec.l_min = 200;
  spec.l_max = 400;
  // Bitwise: the shortest chunk gets the full margin, the longest gets the
  // same (1 - lambda) * m0 the formula promises.
  CHECK(chunk_margin(spec, 200) == 0.40);
  CHECK(chunk_margin(spec, 400) == (1.0 - 0.25) * 0.40);
}

TEST_CASE("chunk margin interpolates linearly between the endpoints") {
  ChunkMarginSpec spec;
  spec.m0 = 0.40;
  spec.lambda = 0.25;
  spec.l_min = 200;
  spec.l_max = 400;
  // Midpoint: (1 - 0.25 * 0.5) * 0.4 = 0.35 up to one rounding.
  CHECK(near(chunk_margin(spec, 300), 0.35, 1e-15, 0.0));
  // Strictly decreasing in the width for lambda > 0.
  double prev = chunk_margin(spec, 200);
  for (int width = 201; width <= 400; ++width) {
    const double cur = chunk_margin(spec, width);
    CHECK(cur <= prev);
    CHECK(cur >= (1.0 - spec.lambda) * spec.m0 - 1e-15);
    prev = cur;
  }
  // Quarter point, against the formula evaluated directly.
  CHECK(near(chunk_margin(spec, 250), (1.0 - 0.25 * 0.25) * 0.40, 1e-15, 0.0));
}

TEST_CASE("lambda = 0 disables the width dependence") {
  ChunkMarginSpec spec;
  spec.m0 = 0.40;
  spec.lambda = 0.0;
  spec.l_min = 20;
  spec.l_max = 60;
  for (int width = 20; width <= 60; width += 5) CHECK(chunk_margin(spec, width) == 0.40);
}

TEST_CASE("chunk margin rejects widths outside its interval") {
  ChunkMarginSpec spec;
  spec.m0 = 0.40;
  spec.lambda = 0.25;
  spec.l_min = 20;
  spec.l_max = 60;
  CHECK_THROWS_AS(chunk_margin(spec, 19), DomainError);
  CHECK_THROWS_AS(chunk_margin(spec, 61), DomainError);
  CHECK_NOTHROW(chunk_margin(spec, 20));
  CHECK_NOTHROW(chunk_margin(spec, 60));
}

TEST_CASE("chunk spec validation") {
  ChunkMarginSpec spec;
  spec.m0 = 0.40;
  spec.lambda = 0.25;
  spec.l_min = 20;
  spec.l_max = 60;
  CHECK_NOTHROW(spec.validate());

  ChunkMarginSpec bad = spec;
  bad.m0 = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = spec;
  bad.m0 = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = spec;
  bad.lambda = -0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = spec;
  bad.lambda = 1.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = spec;
  bad.l_min = 60;  // needs l_min < l_max
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = spec;
  bad.l_min = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("stage margins are looked up verbatim") {
  StageSchedule schedule;
  schedule.margins = {0.40, 0.35, 0.32};
  CHECK(stage_margin(schedule, 0) == 0.40);
  CHECK(stage_margin(schedule, 1) == 0.35);
  CHECK(stage_margin(schedule, 2) == 0.32);
  CHECK_THROWS_AS(stage_margin(schedule, -1), ConfigError);
  CHECK_THROWS_AS(stage_margin(schedule, 3), ConfigError);
}

TEST_CASE("stage schedule validation") {
  StageSchedule schedule;
  CHECK_THROWS_AS(schedule.validate(), ConfigError);  // empty

  schedule.margins = {0.40, 0.35, 0.32};
  CHECK_NOTHROW(schedule.validate());

  schedule.margins = {0.35, 0.40};  // increasing
  CHECK_THROWS_AS(schedule.validate(), ConfigError);

  schedule.margins = {0.40, 0.40};  // constant is allowed
  CHECK_NOTHROW(schedule.validate());

  schedule.margins = {0.40, 0.0};
  CHECK_THROWS_AS(schedule.validate(), ConfigError);
  schedule.margins = {1.0, 0.40};
  CHECK_THROWS_AS(schedule.validate(), ConfigError);
}

TEST_CASE("epochs map onto stages in equal leading blocks") {
  // 9 epochs over 3 stages: 3 + 3 + 3.
  for (int epoch = 0; epoch < 9; ++epoch)
    CHECK(stage_for_epoch(epoch, 9, 3) == epoch / 3);

  // 10 epochs over 3 stages: 4 + 3 + 3 (earlier stages take the remainder).
  const int expected10[] = {0, 0, 0, 0, 1, 1, 1, 2, 2, 2};
  for (int epoch = 0; epoch < 10; ++epoch)
    CHECK(stage_for_epoch(epoch, 10, 3) == expected10[epoch]);

  // Fewer epochs than stages: one stage per epoch, later stages unused.
  CHECK(stage_for_epoch(0, 2, 3) == 0);
  CHECK(stage_for_epoch(1, 2, 3) == 1);

  // Single stage swallows everything.
  for (int epoch = 0; epoch < 5; ++epoch) CHECK(stage_for_epoch(epoch, 5, 1) == 0);

  // The mapping never decreases and ends on the last stage.
  int prev = 0;
  for (int epoch = 0; epoch < 17; ++epoch) {
    const int stage = stage_for_epoch(epoch, 17, 5);
    CHECK(stage >= prev);
    prev = stage;
  }
  CHECK(stage_for_epoch(16, 17, 5) == 4);
}

TEST_CASE("stage mapping rejects out-of-range arguments") {
  CHECK_THROWS_AS(stage_for_epoch(0, 0, 3), ConfigError);
  CHECK_THROWS_AS(stage_for_epoch(0, 5, 0), ConfigError);
  CHECK_THROWS_AS(stage_for_epoch(-1, 5, 3), ConfigError);
  CHECK_THROWS_AS(stage_for_epoch(5, 5, 3), ConfigError);
}
