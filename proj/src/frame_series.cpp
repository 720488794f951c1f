#include "pilotwave/frame_series.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>

#include "pilotwave/errors.hpp"
#include "pilotwave/frame_io.hpp"

namespace pilotwave {

void validate_spec(const PropagatorSpec& spec, const Grid& grid) {
    if (!(spec.dt > 0.0)) throw StateError("dt must be positive");
    if (!(spec.total_time >= spec.dt)) throw StateError("total_time must cover at least one step");
    if (spec.frame_stride < 1) throw StateError("frame_stride must be >= 1");
    if (spec.method == Method::crank_nicolson_1d && grid.dim() != 1)
        throw StateError("crank-nicolson runs on 1D grids only");
}

namespace {

std::filesystem::path fresh_spill_dir() {
    static std::atomic<unsigned> counter{0};
    auto dir = std::filesystem::temp_directory_path() /
               ("pilotwave-frames-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter.fetch_add(1)));
    return dir;
}

}  // namespace

FrameSeries::FrameSeries(GridPtr grid, PhysicalParams params, Topology topo, PropagatorSpec spec)
    : grid_(std::move(grid)),
      params_(std::move(params)),
      topo_(topo),
      spec_(spec),
      spill_dir_(fresh_spill_dir()) {}

FrameSeries::~FrameSeries() {
    if (!spill_dir_.empty()) {
        std::error_code ec;
        std::filesystem::remove_all(spill_dir_, ec);  // best effort
    }
}

void FrameSeries::append(double time, std::vector<cd> values) {
    if (values.size() != grid_->size()) throw ShapeError("frame size does not match grid");
    if (!times_.empty() && !(time > times_.back()))
        throw StateError("frame times must be strictly increasing");
    if (!times_.empty()) {
        auto prev = this->values(times_.size() - 1);
        double acc = 0.0;
        for (std::size_t f = 0; f < values.size(); ++f) acc += std::norm(values[f] - (*prev)[f]);
        max_delta_ = std::max(max_delta_, std::sqrt(acc * grid_->cell_volume()));
    }
    times_.push_back(time);
    slots_.push_back({std::make_shared<const std::vector<cd>>(std::move(values)), {}});
    resident_.push_front(slots_.size() - 1);
    resident_bytes_ += grid_->size() * sizeof(cd);
    evict_to_budget();
}

void FrameSeries::evict_to_budget() const {
    const std::size_t frame_bytes = grid_->size() * sizeof(cd);
    while (resident_bytes_ > spec_.memory_budget && resident_.size() > 2) {
        const std::size_t victim = resident_.back();
        resident_.pop_back();
        Slot& slot = slots_[victim];
        if (slot.file.empty()) {
            std::filesystem::create_directories(spill_dir_);
            slot.file = spill_dir_ / ("frame-" + std::to_string(victim) + ".bin");
            write_complex_field(slot.file, *slot.mem);
        }
        slot.mem.reset();
        resident_bytes_ -= frame_bytes;
    }
}

std::shared_ptr<const std::vector<cd>> FrameSeries::values(std::size_t i) const {
    if (i >= slots_.size()) throw StateError("frame index out of range");
    Slot& slot = slots_[i];
    if (!slot.mem) {
        slot.mem = std::make_shared<const std::vector<cd>>(
            read_complex_field(slot.file, grid_->size()));
        resident_.push_front(i);
        resident_bytes_ += grid_->size() * sizeof(cd);
        evict_to_budget();
    } else {
        auto it = std::find(resident_.begin(), resident_.end(), i);
        if (it != resident_.begin() && it != resident_.end())
            resident_.splice(resident_.begin(), resident_, it);
    }
    return slot.mem;
}

WaveFunction FrameSeries::frame(std::size_t i) const {
    return WaveFunction::from_values(grid_, params_, *values(i), time(i), topo_);
}

}  // namespace pilotwave
