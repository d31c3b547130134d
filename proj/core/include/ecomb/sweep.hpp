#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecomb/io.hpp"

namespace ecomb {

// One sweep axis; the cartesian product of all axes forms the grid, last
// axis fastest. Values are either listed explicitly or generated from
// start/stop/count with linear or log spacing.
struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

struct SweepConfig {
  std::string name = "sweep";
  std::string solver = "lattice"; // "lattice" or "analytic"
  nlohmann::json base;            // matched-problem parameters and numerics
  std::vector<SweepAxis> axes;
  std::vector<std::string> observables; // sigma, resonant_weight, nonresonant_weight,
                                        // doc<m>_max, doc<m>_argmax
  int workers = 1;
};

SweepConfig parse_sweep_config(const nlohmann::json& j);
SweepConfig load_sweep_config(const std::string& path);

struct SweepOutcome {
  Dataset dataset;
  std::vector<nlohmann::json> problems; // resolved per grid point, in row order
};

// Runs every grid point, one output slot per point: the emitted rows are
// independent of worker count and completion order.
SweepOutcome run_sweep(const SweepConfig& cfg);

// Applies fn to indices 0..count-1 across workers; each index writes only
// its own slot, so results are deterministic for any worker count.
void parallel_for_indexed(std::size_t count, int workers,
                          const std::function<void(std::size_t)>& fn);

} // namespace ecomb
