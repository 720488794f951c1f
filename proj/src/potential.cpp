#include "pilotwave/potential.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "pilotwave/errors.hpp"

namespace pilotwave {

Potential::Potential(GridPtr grid, Kind kind, std::vector<double> values)
    : grid_(std::move(grid)), kind_(kind), values_(std::move(values)) {
    if (values_.size() != grid_->size())
        throw ShapeError("potential table has " + std::to_string(values_.size()) +
                         " values, grid has " + std::to_string(grid_->size()));
    for (double v : values_) {
        if (!std::isfinite(v)) throw StateError("potential contains a non-finite value");
        max_abs_ = std::max(max_abs_, std::abs(v));
    }
}

Potential Potential::free_space(GridPtr grid) {
    std::vector<double> vals(grid->size(), 0.0);
    return Potential(std::move(grid), Kind::free, std::move(vals));
}

Potential Potential::harmonic(GridPtr grid, const PhysicalParams& params, const Point& omega,
                              const Point& center) {
    validate_params(params, grid->dim());
    std::vector<double> vals(grid->size());
    for (std::size_t f = 0; f < grid->size(); ++f) {
        const Point q = grid->point_at(f);
        double v = 0.0;
        for (int a = 0; a < grid->dim(); ++a) {
            const double d = q[a] - center[a];
            v += 0.5 * params.masses[a] * omega[a] * omega[a] * d * d;
        }
        vals[f] = v;
    }
    return Potential(std::move(grid), Kind::harmonic, std::move(vals));
}

Potential Potential::barrier(GridPtr grid, double height, double width, double center) {
    std::vector<double> vals(grid->size());
    for (std::size_t f = 0; f < grid->size(); ++f) {
        const double x = grid->point_at(f)[0];
        const double d = (x - center) / width;
        vals[f] = height * std::exp(-0.5 * d * d);
    }
    return Potential(std::move(grid), Kind::barrier, std::move(vals));
}

Potential Potential::double_slit(GridPtr grid, double separation, double slit_width,
                                 double wall_position, double wall_height, double wall_width) {
    if (grid->dim() < 2) throw GridError("double-slit mask needs a 2D grid");
    std::vector<double> vals(grid->size());
    for (std::size_t f = 0; f < grid->size(); ++f) {
        const Point q = grid->point_at(f);
        const double dx = (q[0] - wall_position) / wall_width;
        const double wall = std::exp(-0.5 * dx * dx);
        const double du = (q[1] - 0.5 * separation) / slit_width;
        const double dl = (q[1] + 0.5 * separation) / slit_width;
        double open = std::exp(-0.5 * du * du) + std::exp(-0.5 * dl * dl);
        if (open > 1.0) open = 1.0;
        vals[f] = wall_height * wall * (1.0 - open);
    }
    return Potential(std::move(grid), Kind::double_slit, std::move(vals));
}

Potential Potential::tabulated(GridPtr grid, std::vector<double> values) {
    return Potential(std::move(grid), Kind::tabulated, std::move(values));
}

Potential Potential::from_csv(GridPtr grid, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open potential file: " + path);
    std::vector<double> vals;
    vals.reserve(grid->size());
    std::string line;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            if (cell.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                vals.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw IoError("bad numeric value '" + cell + "' in " + path);
            }
        }
    }
    return Potential(std::move(grid), Kind::tabulated, std::move(vals));
}

}  // namespace pilotwave
