// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "cemint/grid.hpp"

using namespace cemint;

TEST_CASE("grid counts on 128/8") {
  const Grids grids = build_grids(128, 8);
  CHECK(grids.fine.h == doctest::Approx(1.0 / 128));
  CHECK(grids.coarse.H == doctest::Approx(1.0 / 8));
  CHECK(grids.coarse.vertex_count() == 81);
  CHECK(grids.fine.node_count() == 129 * 129);
  CHECK(grids.fine.interior_count() == 127 * 127);
  CHECK(grids.coarse.ratio == 16);
}

TEST_CASE("partition of unity sums to one at every fine node") {
  const Grids grids = build_grids(4, 2);
  CHECK(grids.coarse.ratio == 2);
  for (int iy = 0; iy <= 4; ++iy)
    for (int ix = 0; ix <= 4; ++ix) {
      const double x = grids.fine.coord(ix);
      const double y = grids.fine.coord(iy);
      double total = 0.0;
      for (int vy = 0; vy <= 2; ++vy)
        for (int vx = 0; vx <= 2; ++vx) {
          const double value = grids.pou.chi(vx, vy, x, y);
          CHECK(value >= 0.0);
          CHECK(value <= 1.0);
          total += value;
        }
      CHECK(std::abs(total - 1.0) <= 1e-14);
    }
}

TEST_CASE("hat gradient sums match a finite-difference oracle") {
  const Grids grids = build_grids(128, 8);
  // chi is bilinear inside each coarse cell, so central differences that do
  // not cross a coarse line are exact.
  const double step = 1e-7;
  double max_value = 0.0, max_oracle = 0.0;
  for (int cy = 0; cy < 128; ++cy)
    for (int cx = 0; cx < 128; ++cx) {
      const double xm = (cx + 0.5) / 128.0;
      const double ym = (cy + 0.5) / 128.0;
      double oracle = 0.0;
      for (int vy = 0; vy <= 8; ++vy)
        for (int vx = 0; vx <= 8; ++vx) {
          const double dx =
              (grids.pou.chi(vx, vy, xm + step, ym) - grids.pou.chi(vx, vy, xm - step, ym)) /
              (2 * step);
          const double dy =
              (grids.pou.chi(vx, vy, xm, ym + step) - grids.pou.chi(vx, vy, xm, ym - step)) /
              (2 * step);
          oracle += dx * dx + dy * dy;
        }
      const double value = grids.pou.sum_grad_sq[grids.fine.cell_id(cx, cy)];
      CHECK(value == doctest::Approx(oracle).epsilon(1e-6));
      max_value = std::max(max_value, value);
      max_oracle = std::max(max_oracle, oracle);
    }
  CHECK(max_value == doctest::Approx(max_oracle).epsilon(1e-6));
}

TEST_CASE("divisibility violation is a configuration error") {
  CHECK_THROWS_AS(build_grids(10, 4), std::invalid_argument);
  CHECK_THROWS_AS(build_grids(4, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_grids(1, 1), std::invalid_argument);
}

TEST_CASE("oversampling boxes") {
  const Grids grids = build_grids(32, 8);

  SUBCASE("center element with one layer is a 3x3 block") {
    const int center = grids.coarse.element_id(4, 4);
    const OversampleRegion region = oversample(grids.fine, grids.coarse, center, 1);
    CHECK(region.ex1 - region.ex0 == 3);
    CHECK(region.ey1 - region.ey0 == 3);
    CHECK(region.cells.cell_count() == 12 * 12);
  }
  SUBCASE("corner element with two layers clips to 3x3") {
    const OversampleRegion region = oversample(grids.fine, grids.coarse, 0, 2);
    CHECK(region.ex0 == 0);
    CHECK(region.ey0 == 0);
    CHECK(region.ex1 == 3);
    CHECK(region.ey1 == 3);
  }
  SUBCASE("enough layers saturate the domain") {
    for (int e : {0, 27, 63}) {
      const OversampleRegion region = oversample(grids.fine, grids.coarse, e, 8);
      CHECK(region.covers_domain(grids.coarse));
      CHECK(region.cells.cell_count() == 32 * 32);
    }
  }
}

TEST_CASE("oversampled node sets are nested") {
  const Grids grids = build_grids(32, 8);
  const int element = grids.coarse.element_id(2, 5);
  std::set<int> previous;
  for (int m = 1; m <= 6; ++m) {
    const OversampleRegion region = oversample(grids.fine, grids.coarse, element, m);
    std::set<int> nodes(region.dofs.nodes.begin(), region.dofs.nodes.end());
    for (int node : previous) CHECK(nodes.count(node) == 1);
    previous = std::move(nodes);
  }
}

TEST_CASE("coarse elements cover the fine cells disjointly") {
  const Grids grids = build_grids(24, 4);
  std::vector<int> owner(grids.fine.cell_count(), -1);
  for (int e = 0; e < grids.coarse.element_count(); ++e) {
    const CellBox box = grids.coarse.element_cells(e);
    for (int cy = box.cy0; cy < box.cy1; ++cy)
      for (int cx = box.cx0; cx < box.cx1; ++cx) {
        CHECK(owner[grids.fine.cell_id(cx, cy)] == -1);
        owner[grids.fine.cell_id(cx, cy)] = e;
      }
  }
  for (int c = 0; c < grids.fine.cell_count(); ++c) CHECK(owner[c] >= 0);
}

TEST_CASE("default layer counts") {
  CHECK(default_layers(1.0 / 8, 1e2) == 2);
  CHECK(default_layers(1.0 / 16, 1e4) == 5);
  CHECK(default_layers(1.0 / 2, 1.0) == 1);
  // further table pairs at small H
  CHECK(default_layers(1.0 / 16, 1e2) == 3);
  CHECK(default_layers(1.0 / 8, 1e3) == 3);
  CHECK(default_layers(1.0 / 16, 1e3) == 4);
  CHECK(default_layers(1.0 / 8, 1e4) == 4);
}
