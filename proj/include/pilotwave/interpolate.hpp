#pragma once

#include "pilotwave/wavefunction.hpp"

namespace pilotwave {

// Catmull-Rom tensor-product interpolation at an off-grid point (q must lie
// inside the box).  Stencil neighbors that fall outside the index range wrap
// on periodic grids and read as zero on Dirichlet grids (the wall value).
// The scheme is linear in the field values and reproduces constants exactly.
cd interp_complex(const Grid& g, const std::vector<cd>& field, const Point& q, Topology topo);
double interp_real(const Grid& g, const std::vector<double>& field, const Point& q, Topology topo);

}  // namespace pilotwave
