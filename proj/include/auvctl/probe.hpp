#pragma once

#include "auvctl/control.hpp"
#include "auvctl/ocean.hpp"
#include "auvctl/rl/env.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace auvctl {

/// Reference and response of one control channel sampled at the control rate.
struct ChannelTrace {
    std::vector<double> reference;
    std::vector<double> actual;
    std::vector<bool> saturated;
    bool angular = false;  // errors wrap to (-pi, pi]

    std::size_t size() const { return actual.size(); }
    double error(std::size_t k) const;
    double rms_error() const;
    double mean_abs_error() const;
};

struct ProbeResult {
    double dt = kControlDt;
    ChannelTrace yaw;
    ChannelTrace depth;
    std::vector<VehicleState> states;
    std::vector<ActuatorCommand> commands;

    /// Heading RMS in degrees plus depth RMS in metres.
    double tracking_rms() const;
};

/// Heading and depth references at the control rate.
struct ReferenceSeries {
    double dt = kControlDt;
    std::vector<double> heading;  // rad
    std::vector<double> depth;    // m

    std::size_t size() const { return heading.size(); }
    void validate() const;
};

struct ProbeConfig {
    double rpm = 1200.0;
    double depth = 20.0;      // trim depth, m
    double heading = 0.0;     // trim heading, rad
    double trim_time = 20.0;  // s of heading and depth hold before the references start
    Vec2 origin{300.0, 300.0};
    double depth_kp = 0.1;
    double depth_kd = 0.3;
    SeaCondition sea;
    WaveSpectrumParams spectrum;
    std::uint64_t wave_seed = 1;

    void validate() const;
};

/// Holds trim, then steps heading and depth by the given amounts and records `duration` seconds.
ProbeResult step_probe(const ControllerConfig& ctrl, const ProbeConfig& cfg, double heading_step,
                       double depth_step, double duration);

/// Holds trim at the first reference sample, then follows the series. Heading is commanded
/// directly on the controller bank; depth goes through the outer depth-to-pitch loop.
ProbeResult reference_probe(const ControllerConfig& ctrl, const ProbeConfig& cfg, const ReferenceSeries& ref);

/// Heading and depth of a guidance rollout on the target-tracking task in Ideal mode.
ReferenceSeries record_tracking_reference(std::uint64_t seed, double duration = 120.0);

std::string probe_csv_header();
void write_probe_csv(std::ostream& os, const ProbeResult& r);

}  // namespace auvctl
