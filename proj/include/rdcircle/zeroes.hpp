#pragma once

#include <optional>
#include <vector>

#include "rdcircle/grid.hpp"
#include "rdcircle/stepper.hpp"

namespace rdcircle {

/// Zero number of a field on the circle, counted as sign changes of its
/// trigonometric interpolant. Sign changes come in pairs, so count is even.
struct ZeroCount {
    int count = 0;
    bool all_simple = true;
    double min_slope_at_zero = 0.0;  // +inf when there are no zeros
    double tolerance_used = 0.0;
};

/// Counts sign changes of the interpolant. Nodal values within tol are
/// indeterminate; crossings are refined by bisection (depth 60) and a zero is
/// simple when the interpolated derivative there exceeds tol in magnitude.
/// Default tolerance: 1e-9 relative to the sup-norm.
ZeroCount zero_count(const StateVector& s);
ZeroCount zero_count(const StateVector& s, double tol_abs);

struct ZeroHistoryEntry {
    double time = 0.0;
    ZeroCount zc;
    bool degenerate = false;  // sample sup-norm below the degeneracy floor
};

struct ZeroHistory {
    std::vector<ZeroHistoryEntry> entries;
    bool monotone_ok = false;  // counts non-increasing over non-degenerate samples
};

/// Samples zero counts along a (linear/tangent) trajectory every sample_dt,
/// which must be a multiple of the trajectory's macro step.
ZeroHistory zero_history(const TrajectorySegment& traj, double sample_dt,
                         std::optional<double> tol_abs = std::nullopt);

struct DropInterval {
    double t_from = 0.0, t_to = 0.0;
    int from_count = 0, to_count = 0;
};

struct DroppingReport {
    std::vector<DropInterval> drops;
    int plateau = 0;
    /// Earliest sample time from which every later sample has only simple
    /// zeros; negative when that never happens.
    double first_all_simple_time = -1.0;
};

DroppingReport dropping_times(const ZeroHistory& history);

}  // namespace rdcircle
