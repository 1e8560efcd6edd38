#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "thematic/core/model.hpp"

namespace thematic::orchestrator {

struct NavigationGesture {
    std::string axis_id;
    double position = 0.0;  // [-1, 1]; sign picks the pole, magnitude the intensity
};

inline void check_position(double position) {
    if (!(position >= -1.0 && position <= 1.0))
        fail(ErrorCode::position_out_of_range, "position must lie in [-1, 1]", json{{"position", position}});
}

/// Products |p| * 6 within this distance of an integer count as that integer,
/// so positions computed as j/6.0 select intensity j despite rounding.
inline constexpr double kBoundarySnap = 1e-9;

/// t = ceil(|position| * 6), clamped to [1, 6] for non-zero positions; 0 at
/// the origin (no perturbation).
inline int target_intensity(double position) {
    check_position(position);
    if (position == 0.0) return 0;
    const double x = std::abs(position) * kPerturbationsPerDirection;
    const double nearest = std::round(x);
    const double t = std::abs(x - nearest) <= kBoundarySnap ? nearest : std::ceil(x);
    return std::clamp(static_cast<int>(t), 1, kPerturbationsPerDirection);
}

inline std::optional<Direction> direction_of(double position) {
    check_position(position);
    if (position < 0.0) return Direction::left;
    if (position > 0.0) return Direction::right;
    return std::nullopt;
}

/// The gated candidate set: perturbations on the chosen side whose
/// intensity_rank does not exceed the target intensity. Axis order is kept.
inline std::vector<Perturbation> candidates_for(const ThemeAxis& axis, double position) {
    auto dir = direction_of(position);
    std::vector<Perturbation> out;
    if (!dir) return out;
    const int t = target_intensity(position);
    for (const auto& p : axis.perturbations)
        if (p.direction == *dir && p.intensity_rank <= t) out.push_back(p);
    return out;
}

}  // namespace thematic::orchestrator
