#pragma once

#include <iosfwd>
#include <string>

#include "gpsfilt/trajectory.hpp"

namespace gpsfilt {

// CSV layout: one header line "t,truth,measured", then one row per sample.
// Timestamps must be uniformly spaced; the spacing becomes Trajectory::dt.

Trajectoryd load_csv(std::istream& in);
Trajectoryd load_csv(const std::string& path);

void save_csv(const Trajectoryd& traj, std::ostream& out);
void save_csv(const Trajectoryd& traj, const std::string& path);

// Per-sample absolute error as "k,abs_error" rows; k starts at `first_index`
// so windowed estimates keep their position in the source trajectory.
void write_error_series(const VectorX<double>& estimate, const VectorX<double>& truth,
                        Index first_index, std::ostream& out);
void write_error_series(const VectorX<double>& estimate, const VectorX<double>& truth,
                        Index first_index, const std::string& path);

}  // namespace gpsfilt
