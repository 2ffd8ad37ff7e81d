#pragma once

#include "mecdelay/model.hpp"
#include "mecdelay/state_space.hpp"
#include "mecdelay/stochastic_models.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace mecdelay {

/// Outcome of one simulated slot.
struct SlotEvents {
    bool arrived = false;
    bool admitted = false;
    bool transmitted = false;  ///< a queue-1 task moved to queue 2
    bool computed = false;     ///< a queue-2 task left the system
    std::int64_t departed_admission_slot = -1;  ///< admission slot of the departing task
};

/// Slot-by-slot engine. Within a slot the arrival chain, server 1 (service
/// or vacation) and server 2 each take one step from the start-of-slot
/// state; the queue lengths are then resolved together.
class TandemSimulator {
public:
    TandemSimulator(const SystemModel& model, std::uint64_t seed, std::uint64_t replication);

    SlotEvents step();

    /// Chain state at the start of the next slot.
    State state() const;
    std::int64_t slot() const noexcept { return slot_; }
    int q1() const noexcept { return i1_; }
    int q2() const noexcept { return i2_; }
    ServerMode mode() const noexcept { return mode_; }
    /// Admission slots of queued tasks, oldest first (queue 2 then queue 1).
    std::vector<std::int64_t> queued_admission_slots() const;
    /// Admission slot of the oldest task in the system, -1 when empty.
    std::int64_t oldest_admission_slot() const noexcept { return count_ ? ring_[head_] : -1; }

private:
    void push_task(std::int64_t admitted_at);
    std::int64_t pop_task();

    int N1_, N2_;
    DMapSampler arrivals_;
    DPhSampler transmission_, computation_, vacation_;
    std::mt19937_64 arrival_rng_, queue1_rng_, queue2_rng_, vacation_rng_;

    std::int64_t slot_ = 0;
    int i1_ = 0, i2_ = 0;
    ServerMode mode_ = ServerMode::idle;
    int arrival_phase_ = 0, phase1_ = -1, phase2_ = -1;

    std::vector<std::int64_t> ring_;
    std::size_t head_ = 0, count_ = 0;
};

/// Replication control and estimator settings.
struct SimConfig {
    std::uint64_t seed = 1;
    double confidence = 0.95;
    double relative_accuracy = 0.05;
    std::int64_t warmup = 10000;               ///< discarded slots per replication
    std::int64_t replication_slots = 1000000;  ///< measurement window per replication
    int min_replications = 10;
    int round_size = 10;  ///< replications added between stopping checks
    std::int64_t max_slots = 4000000000;  ///< budget over all measurement windows
    std::vector<int> bounds;              ///< delay bounds n for W_n
    int threads = 0;                      ///< 0: hardware concurrency
    int histogram_cap = 4096;             ///< delays >= cap share the last bin

    void validate() const;
};

struct Interval {
    double point = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double half_width() const noexcept { return 0.5 * (upper - lower); }
    bool contains(double v) const noexcept { return lower <= v && v <= upper; }
};

struct SimEstimates {
    std::vector<int> bounds;
    std::vector<Interval> violation;  ///< W_n, simultaneous over the bounds
    Interval d_ave, d_sd, p_off, p2_full, admitted_rate;
    double violation_confidence_each = 0.0;  ///< per-bound level after the Bonferroni split
    std::int64_t replications = 0;
    std::int64_t slots = 0;            ///< measurement slots
    std::int64_t simulated_slots = 0;  ///< including warmup and drain
    std::int64_t tasks = 0;            ///< measured completed tasks
    std::vector<std::int64_t> histogram;  ///< delay counts, index = delay in slots
    bool converged = false;
};

/// Totals of one replication.
struct ReplicationTotals {
    std::int64_t tasks = 0;
    double sum_delay = 0.0, sum_delay_sq = 0.0;
    std::vector<std::int64_t> exceed;  ///< per bound, delays > n
    std::int64_t arrivals = 0, admitted = 0, q2_full_slots = 0, slots = 0, simulated_slots = 0;
    std::vector<std::int64_t> histogram;
};

ReplicationTotals run_replication(const SystemModel& model, const SimConfig& cfg, std::uint64_t replication);

/// Estimates from a set of replications (in index order).
SimEstimates estimate(const std::vector<ReplicationTotals>& reps, const SimConfig& cfg);

/// Sequential procedure: rounds of replications until every W_n bound and
/// the mean delay meet the relative accuracy, or the slot budget runs out.
SimEstimates simulate(const SystemModel& model, const SimConfig& cfg);

}  // namespace mecdelay
