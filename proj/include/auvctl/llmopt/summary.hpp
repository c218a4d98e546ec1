#pragma once

#include "auvctl/probe.hpp"

namespace auvctl::llm {

/// Step-response figures of one channel. Errors are in channel units (rad for yaw).
struct ChannelSummary {
    double overshoot_pct = 0.0;
    double settling_time = 0.0;       // s until the error stays inside +-5% of the excursion
    double steady_state_error = 0.0;  // mean |e| over the final 20%
    int oscillations = 0;             // error sign changes from the first band entry or crossing
    double lag = 0.0;                 // s, peak cross-correlation offset
    double saturation_fraction = 0.0;
    double rms_error = 0.0;
};

struct TrackingSummary {
    ChannelSummary yaw;
    ChannelSummary depth;
    /// Heading RMS in degrees plus depth RMS in metres.
    double tracking_rms = 0.0;
};

/// The excursion is the larger of |final reference - initial response| and the
/// reference range; a zero excursion gives zero overshoot and settling time.
ChannelSummary summarize_channel(const ChannelTrace& trace, double dt);
TrackingSummary summarize_tracking(const ProbeResult& probe);

}  // namespace auvctl::llm
