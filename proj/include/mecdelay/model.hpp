#pragma once

#include "mecdelay/kernel.hpp"
#include "mecdelay/state_space.hpp"
#include "mecdelay/stochastic_models.hpp"

namespace mecdelay {

/// Validated tandem system: arrivals, the three durations and the buffers.
struct SystemModel {
    DMap<double> arrivals;
    DPh<double> transmission;
    DPh<double> computation;
    DPh<double> vacation;
    int N1;
    int N2;

    PhaseLayout layout() const {
        return build_layout(int(arrivals.phases()), int(transmission.order()), int(computation.order()),
                            int(vacation.order()), N1, N2);
    }
    LevelKernel<double> kernel() const {
        return build_blocks(arrivals, transmission, computation, vacation, layout());
    }
    double lambda() const { return dmap_arrival_rate(arrivals); }
};

}  // namespace mecdelay
