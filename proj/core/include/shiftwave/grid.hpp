#pragma once

#include <cmath>
#include <string>

#include "shiftwave/errors.hpp"

namespace shiftwave {

/// Uniform 1-D grid. Used both for wave profiles (z axis) and Cauchy
/// fields (x axis). Wave-specific validity checks (h vs kernel support,
/// domain width vs tail scales) are enforced at the wave-solver entry
/// points, not here.
struct Grid1D {
    double min = 0.0;
    double h = 1.0;
    int n = 0;

    static Grid1D from_range(double lo, double hi, double spacing) {
        if (!(spacing > 0.0)) throw ModelError("grid spacing must be positive");
        if (!(hi > lo)) throw ModelError("grid range must be nonempty");
        const int count = static_cast<int>(std::llround((hi - lo) / spacing)) + 1;
        if (count < 16) throw ModelError("grid too small: need at least 16 nodes");
        return Grid1D{lo, spacing, count};
    }

    double at(int j) const { return min + h * static_cast<double>(j); }
    double max() const { return at(n - 1); }
    double width() const { return max() - min; }

    /// Nearest node index, clamped to the grid.
    int index_of(double x) const {
        int j = static_cast<int>(std::llround((x - min) / h));
        if (j < 0) j = 0;
        if (j >= n) j = n - 1;
        return j;
    }
};

}  // namespace shiftwave
