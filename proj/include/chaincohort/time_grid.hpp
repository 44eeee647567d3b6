#ifndef CHAINCOHORT_TIME_GRID_HPP
#define CHAINCOHORT_TIME_GRID_HPP

#include <cstdint>
#include <string>

namespace chaincohort {

/// Discrete analysis grid. Grid points are t_i = epoch + i*step; a raw
/// timestamp maps to the smallest grid point at or after it (round-up, so a
/// quantity stamped at t_i never contains information from after t_i).
struct TimeGrid {
    int64_t epoch_s = 0;       // 1970-01-01T00:00Z
    int64_t step_s = 86400;    // 1 day

    double days_per_step() const { return static_cast<double>(step_s) / 86400.0; }
};

/// Round a Unix timestamp up onto the grid. Timestamps exactly on a boundary
/// map to that boundary; the epoch itself maps to index 0.
/// Throws std::invalid_argument for timestamps before the epoch or a
/// non-positive step.
int64_t sample_time(int64_t unix_s, const TimeGrid& grid);

/// Timestamp of grid point i.
inline int64_t grid_time(int64_t index, const TimeGrid& grid) {
    return grid.epoch_s + index * grid.step_s;
}

// ISO-8601 helpers (UTC only). parse_iso accepts "YYYY-MM-DD" and
// "YYYY-MM-DDThh:mm:ss[Z]".
int64_t parse_iso(const std::string& text);
std::string format_iso_date(int64_t unix_s);
std::string format_iso_datetime(int64_t unix_s);

}  // namespace chaincohort

#endif  // CHAINCOHORT_TIME_GRID_HPP
