#pragma once

#include <string>
#include <vector>

#include "yannrl/envs/trajectory.hpp"

namespace yannrl::bench {

struct SvgLabels {
    std::string title;
    std::vector<std::string> states;  // defaults to x1..xn
    std::vector<std::string> inputs;  // defaults to u1..um
};

/// One panel per state (series plus dashed setpoint line) followed by one
/// panel per input (series plus the two bound lines). Numbers are printed
/// with fixed precision, so identical inputs give identical bytes. An empty
/// trajectory yields the panels with axes only.
[[nodiscard]] std::string render_svg_timeseries(const envs::Trajectory& traj, const Vector& setpoint,
                                                const Box& input_bounds, const SvgLabels& labels = {});

/// Writes render_svg_timeseries to path; throws Error when the file cannot be written.
void emit_svg_timeseries(const envs::Trajectory& traj, const Vector& setpoint, const Box& input_bounds,
                         const std::string& path, const SvgLabels& labels = {});

}  // namespace yannrl::bench
