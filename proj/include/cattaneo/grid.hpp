#pragma once

#include <stdexcept>
#include <vector>

namespace cattaneo {

/// Uniform staggered mesh on [0, L]: N+1 nodes x_j = j*h and N midpoints
/// x_{j+1/2} = (j+1/2)*h, with trapezoid node weights and uniform midpoint weights.
struct Grid {
  double length = 0.0;
  int cells = 0;
  double h = 0.0;
  std::vector<double> nodes;
  std::vector<double> midpoints;
  std::vector<double> node_weights;
  std::vector<double> midpoint_weights;

  int interior_nodes() const { return cells - 1; }
};

inline Grid build_grid(double length, int cells) {
  if (!(length > 0.0)) throw std::invalid_argument("grid length must be positive");
  if (cells < 4) throw std::invalid_argument("grid needs at least 4 cells");
  Grid g;
  g.length = length;
  g.cells = cells;
  g.h = length / cells;
  g.nodes.resize(cells + 1);
  g.node_weights.assign(cells + 1, g.h);
  for (int j = 0; j <= cells; ++j) g.nodes[j] = j * g.h;
  g.nodes[cells] = length;
  g.node_weights.front() = g.node_weights.back() = 0.5 * g.h;
  g.midpoints.resize(cells);
  g.midpoint_weights.assign(cells, g.h);
  for (int j = 0; j < cells; ++j) g.midpoints[j] = (j + 0.5) * g.h;
  return g;
}

}  // namespace cattaneo
