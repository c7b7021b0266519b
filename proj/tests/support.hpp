#pragma once

#include "rdbc/pde_core.hpp"
#include "rdbc/plant.hpp"

namespace rdbc::test {

inline PlantParams baseline_plant() { return {0.001, 0.01, 5.1, 0, 1}; }
inline PlantParams fast_plant() { return {1.0, 8.0, 9.0, 0, 1}; }
inline PlantParams anti_plant() { return {1.0, 8.0, 9.0, 1, 0}; }

inline double bump(double x) { return x * x * (x - 1) * (x - 1); }

/// u[0] = 5 x^2 (x-1)^2, uhat[0] = x^2 (x-1)^2
inline SimState baseline_state(const SpatialGrid& g) {
  SimState s;
  s.u.resize(g.points());
  s.uhat.resize(g.points());
  for (Eigen::Index i = 0; i < g.points(); ++i) {
    s.u(i) = 5 * bump(g.x(i));
    s.uhat(i) = bump(g.x(i));
  }
  s.uhat_at_event = s.uhat;
  return s;
}

}  // namespace rdbc::test
