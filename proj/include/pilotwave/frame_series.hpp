#pragma once

#include <filesystem>
#include <list>
#include <memory>
#include <vector>

#include "pilotwave/wavefunction.hpp"

namespace pilotwave {

enum class Method { split_step_spectral, crank_nicolson_1d };

struct PropagatorSpec {
    Method method = Method::split_step_spectral;
    double dt = 1e-3;
    double total_time = 1.0;
    std::size_t frame_stride = 1;
    // Guard against under-sampling the evolution: consecutive stored frames
    // must differ by less than this in L2.
    double frame_delta_guard = 0.1;
    // Frames beyond this byte budget spill to a temp directory on disk.
    std::size_t memory_budget = std::size_t(1) << 30;
};

void validate_spec(const PropagatorSpec& spec, const Grid& grid);

// Time-ordered wave-function snapshots at uniform spacing dt*frame_stride.
// Storage is memory-first with LRU spill to disk once the budget is exceeded,
// so trajectory integration can random-access frames regardless of run length.
class FrameSeries {
  public:
    FrameSeries(GridPtr grid, PhysicalParams params, Topology topo, PropagatorSpec spec);
    ~FrameSeries();

    FrameSeries(FrameSeries&&) noexcept = default;
    FrameSeries& operator=(FrameSeries&&) noexcept = default;

    void append(double time, std::vector<cd> values);

    std::size_t size() const { return times_.size(); }
    const std::vector<double>& times() const { return times_; }
    double time(std::size_t i) const { return times_[i]; }
    double frame_interval() const { return spec_.dt * double(spec_.frame_stride); }

    // Raw amplitude view; loads from the spill directory when evicted.
    std::shared_ptr<const std::vector<cd>> values(std::size_t i) const;
    // Materialized snapshot (re-normalized by the construction contract).
    WaveFunction frame(std::size_t i) const;

    const Grid& grid() const { return *grid_; }
    GridPtr grid_ptr() const { return grid_; }
    const PhysicalParams& params() const { return params_; }
    Topology topology() const { return topo_; }
    const PropagatorSpec& spec() const { return spec_; }

    // Largest L2 difference between consecutive frames seen so far.
    double max_frame_delta() const { return max_delta_; }

  private:
    struct Slot {
        std::shared_ptr<const std::vector<cd>> mem;
        std::filesystem::path file;
    };

    void evict_to_budget() const;

    GridPtr grid_;
    PhysicalParams params_;
    Topology topo_ = Topology::periodic;
    PropagatorSpec spec_;
    std::vector<double> times_;
    mutable std::vector<Slot> slots_;
    mutable std::list<std::size_t> resident_;  // most recently used first
    mutable std::size_t resident_bytes_ = 0;
    std::filesystem::path spill_dir_;
    double max_delta_ = 0.0;
};

}  // namespace pilotwave
