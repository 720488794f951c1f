#pragma once

#include <string>
#include <vector>

#include "pilotwave/grid.hpp"

namespace pilotwave {

// Real scalar field on the grid (energy units).
class Potential {
  public:
    enum class Kind { free, harmonic, barrier, double_slit, tabulated };

    static Potential free_space(GridPtr grid);
    // V = sum_k 1/2 m_k w_k^2 (q_k - c_k)^2
    static Potential harmonic(GridPtr grid, const PhysicalParams& params, const Point& omega,
                              const Point& center = {});
    // Smooth bump V = height * exp(-(q0 - center)^2 / 2 width^2) along axis 0.
    static Potential barrier(GridPtr grid, double height, double width, double center);
    // Wall across axis 0 at wall_position with two smooth slit openings in
    // axis 1, centered at +-separation/2 with the given width.
    static Potential double_slit(GridPtr grid, double separation, double slit_width,
                                 double wall_position, double wall_height, double wall_width);
    static Potential tabulated(GridPtr grid, std::vector<double> values);
    // Grid-ordered CSV, row-major, axis 0 slowest; one value per line or
    // comma-separated.
    static Potential from_csv(GridPtr grid, const std::string& path);

    Kind kind() const { return kind_; }
    const Grid& grid() const { return *grid_; }
    GridPtr grid_ptr() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    double max_abs() const { return max_abs_; }

  private:
    Potential(GridPtr grid, Kind kind, std::vector<double> values);

    GridPtr grid_;
    Kind kind_ = Kind::free;
    std::vector<double> values_;
    double max_abs_ = 0.0;
};

}  // namespace pilotwave
