#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace pilotwave {

// Renders the static plots of a finished run from its artifacts:
// density_trajectories.svg always; ks_curve.svg when equivariance results
// exist; quantum_potential.svg when polar fields exist.  Returns the files
// written; each plot whose inputs are absent appends one line to `notices`
// instead of failing.  Trajectory paths are the only <polyline> elements, so
// their count equals the number of paths drawn.
std::vector<std::filesystem::path> export_plots(const std::filesystem::path& run_dir,
                                                std::vector<std::string>* notices = nullptr);

}  // namespace pilotwave
