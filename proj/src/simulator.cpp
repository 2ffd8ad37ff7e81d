#include "mecdelay/simulator.hpp"

#include "parallel.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mecdelay {

namespace {

enum Stream : std::uint64_t { arrival_stream = 0, queue1_stream = 1, queue2_stream = 2, vacation_stream = 3 };

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t replication, std::uint64_t stream) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(replication),
                      std::uint32_t(replication >> 32), std::uint32_t(stream)};
    return std::mt19937_64(seq);
}

}  // namespace

TandemSimulator::TandemSimulator(const SystemModel& model, std::uint64_t seed, std::uint64_t replication)
    : N1_(model.N1),
      N2_(model.N2),
      arrivals_(model.arrivals),
      transmission_(model.transmission),
      computation_(model.computation),
      vacation_(model.vacation),
      arrival_rng_(make_stream(seed, replication, arrival_stream)),
      queue1_rng_(make_stream(seed, replication, queue1_stream)),
      queue2_rng_(make_stream(seed, replication, queue2_stream)),
      vacation_rng_(make_stream(seed, replication, vacation_stream)),
      ring_(std::size_t(model.N1 + model.N2)) {
    arrival_phase_ = arrivals_.stationary_phase(arrival_rng_);
}

void TandemSimulator::push_task(std::int64_t admitted_at) {
    ring_[(head_ + count_) % ring_.size()] = admitted_at;
    ++count_;
}

std::int64_t TandemSimulator::pop_task() {
    const std::int64_t t = ring_[head_];
    head_ = (head_ + 1) % ring_.size();
    --count_;
    return t;
}

std::vector<std::int64_t> TandemSimulator::queued_admission_slots() const {
    std::vector<std::int64_t> out(count_);
    for (std::size_t k = 0; k < count_; ++k) out[k] = ring_[(head_ + k) % ring_.size()];
    return out;
}

State TandemSimulator::state() const { return State{i1_, i2_, mode_, arrival_phase_, phase1_, phase2_}; }

SlotEvents TandemSimulator::step() {
    SlotEvents ev;
    const DMapOutcome a = arrivals_.step(arrival_phase_, arrival_rng_);
    ev.arrived = a.arrived;

    bool c1 = false, expired = false;
    int next1 = phase1_;
    if (mode_ == ServerMode::serving) {
        next1 = transmission_.step(phase1_, queue1_rng_);
        c1 = next1 < 0;
    } else if (mode_ == ServerMode::vacation) {
        next1 = vacation_.step(phase1_, vacation_rng_);
        expired = next1 < 0;
    }
    bool c2 = false;
    int next2 = phase2_;
    if (i2_ > 0) {
        next2 = computation_.step(phase2_, queue2_rng_);
        c2 = next2 < 0;
    }

    if (c2) {
        ev.computed = true;
        ev.departed_admission_slot = pop_task();
    }
    ev.transmitted = c1;
    const int q2 = i2_ - int(c2) + int(c1);
    ev.admitted = a.arrived && i1_ - int(c1) < N1_;
    const int q1 = i1_ - int(c1) + int(ev.admitted);
    if (ev.admitted) push_task(slot_);

    if (q2 == 0)
        phase2_ = -1;
    else if (c2 || (i2_ == 0 && c1))
        phase2_ = computation_.initial(queue2_rng_);
    else
        phase2_ = next2;

    if (q1 == 0) {
        mode_ = ServerMode::idle;
        phase1_ = -1;
    } else if (i1_ == 0 || c1 || expired) {
        if (q2 == N2_) {
            mode_ = ServerMode::vacation;
            phase1_ = vacation_.initial(vacation_rng_);
        } else {
            mode_ = ServerMode::serving;
            phase1_ = transmission_.initial(queue1_rng_);
        }
    } else {
        phase1_ = next1;
    }

    i1_ = q1;
    i2_ = q2;
    arrival_phase_ = a.next_phase;
    ++slot_;
    return ev;
}

void SimConfig::validate() const {
    if (!(confidence > 0.0 && confidence < 1.0)) throw ConfigError("simulation.confidence", "must lie in (0,1)");
    if (!(relative_accuracy > 0.0)) throw ConfigError("simulation.relative_accuracy", "must be positive");
    if (warmup < 0) throw ConfigError("simulation.warmup", "must be nonnegative");
    if (replication_slots < 1) throw ConfigError("simulation.replication_slots", "must be positive");
    if (min_replications < 2) throw ConfigError("simulation.min_replications", "must be at least 2");
    if (round_size < 1) throw ConfigError("simulation.round_size", "must be positive");
    if (max_slots < std::int64_t(min_replications) * replication_slots)
        throw ConfigError("simulation.max_slots", "must cover min_replications windows");
    if (histogram_cap < 2) throw ConfigError("simulation.histogram_cap", "must be at least 2");
    for (int b : bounds)
        if (b < 0) throw ConfigError("delay_bounds", "bounds must be nonnegative");
}

ReplicationTotals run_replication(const SystemModel& model, const SimConfig& cfg, std::uint64_t replication) {
    TandemSimulator sim(model, cfg.seed, replication);
    ReplicationTotals t;
    t.exceed.assign(cfg.bounds.size(), 0);
    t.histogram.assign(std::size_t(cfg.histogram_cap), 0);
    const std::int64_t begin = cfg.warmup, end = cfg.warmup + cfg.replication_slots;
    const int N2 = model.N2;

    for (;;) {
        const std::int64_t s = sim.slot();
        if (s >= end) {
            const std::int64_t oldest = sim.oldest_admission_slot();
            if (oldest < 0 || oldest >= end) break;
        }
        const bool in_window = s >= begin && s < end;
        if (in_window && sim.q2() == N2) ++t.q2_full_slots;
        const SlotEvents ev = sim.step();
        if (in_window) {
            t.arrivals += ev.arrived;
            t.admitted += ev.admitted;
        }
        if (ev.computed && ev.departed_admission_slot >= begin && ev.departed_admission_slot < end) {
            const std::int64_t d = s - ev.departed_admission_slot;
            ++t.tasks;
            t.sum_delay += double(d);
            t.sum_delay_sq += double(d) * double(d);
            for (std::size_t k = 0; k < cfg.bounds.size(); ++k) t.exceed[k] += d > cfg.bounds[k];
            ++t.histogram[std::size_t(std::min<std::int64_t>(d, cfg.histogram_cap - 1))];
        }
    }
    t.slots = cfg.replication_slots;
    t.simulated_slots = sim.slot();
    return t;
}

namespace {

double t_quantile(double tail, std::int64_t replications) {
    boost::math::students_t dist(double(replications - 1));
    return boost::math::quantile(boost::math::complement(dist, tail));
}

/// Sample variance of per-replication influence values, divided by R.
double mean_variance(const std::vector<double>& z) {
    const double R = double(z.size());
    const double mean = std::accumulate(z.begin(), z.end(), 0.0) / R;
    double ss = 0.0;
    for (double v : z) ss += (v - mean) * (v - mean);
    return ss / (R - 1.0) / R;
}

Interval make_interval(double point, double variance, double q, bool probability) {
    const double h = q * std::sqrt(std::max(variance, 0.0));
    Interval iv{point, point - h, point + h};
    if (probability) {
        iv.lower = std::max(iv.lower, 0.0);
        iv.upper = std::min(iv.upper, 1.0);
    }
    return iv;
}

/// Ratio sum(Y) / sum(T) with its linearized per-replication influence.
struct Ratio {
    double point = 0.0;
    std::vector<double> influence;
};

template <typename Num, typename Den>
Ratio ratio(const std::vector<ReplicationTotals>& reps, Num num, Den den) {
    double sy = 0.0, st = 0.0;
    for (const auto& r : reps) sy += num(r), st += den(r);
    Ratio out;
    const double tbar = st / double(reps.size());
    out.point = st > 0.0 ? sy / st : 0.0;
    for (const auto& r : reps) out.influence.push_back(tbar > 0.0 ? (num(r) - out.point * den(r)) / tbar : 0.0);
    return out;
}

}  // namespace

SimEstimates estimate(const std::vector<ReplicationTotals>& reps, const SimConfig& cfg) {
    if (reps.size() < 2) throw std::invalid_argument("estimate: needs at least two replications");
    SimEstimates out;
    out.bounds = cfg.bounds;
    out.replications = std::int64_t(reps.size());
    out.histogram.assign(std::size_t(cfg.histogram_cap), 0);
    for (const auto& r : reps) {
        out.slots += r.slots;
        out.simulated_slots += r.simulated_slots;
        out.tasks += r.tasks;
        for (std::size_t k = 0; k < r.histogram.size() && k < out.histogram.size(); ++k) out.histogram[k] += r.histogram[k];
    }

    const double alpha = 1.0 - cfg.confidence;
    const double q = t_quantile(alpha / 2.0, out.replications);
    const std::size_t K = std::max<std::size_t>(cfg.bounds.size(), 1);
    out.violation_confidence_each = 1.0 - alpha / double(K);
    const double qW = t_quantile(alpha / (2.0 * double(K)), out.replications);

    auto tasks = [](const ReplicationTotals& r) { return double(r.tasks); };
    for (std::size_t k = 0; k < cfg.bounds.size(); ++k) {
        const Ratio w = ratio(reps, [k](const ReplicationTotals& r) { return double(r.exceed[k]); }, tasks);
        out.violation.push_back(make_interval(w.point, mean_variance(w.influence), qW, true));
    }

    const Ratio m1 = ratio(reps, [](const ReplicationTotals& r) { return r.sum_delay; }, tasks);
    const Ratio m2 = ratio(reps, [](const ReplicationTotals& r) { return r.sum_delay_sq; }, tasks);
    out.d_ave = make_interval(m1.point, mean_variance(m1.influence), q, false);

    const double N = double(out.tasks);
    double sum1 = 0.0, sum2 = 0.0;
    for (const auto& r : reps) sum1 += r.sum_delay, sum2 += r.sum_delay_sq;
    const double var_unbiased = N > 1.0 ? std::max(0.0, (sum2 - sum1 * sum1 / N) / (N - 1.0)) : 0.0;
    const double sd = std::sqrt(var_unbiased);
    std::vector<double> zsd(reps.size(), 0.0);
    if (sd > 0.0)
        for (std::size_t r = 0; r < reps.size(); ++r)
            zsd[r] = (m2.influence[r] - 2.0 * m1.point * m1.influence[r]) / (2.0 * sd);
    out.d_sd = make_interval(sd, mean_variance(zsd), q, false);

    const Ratio poff = ratio(reps, [](const ReplicationTotals& r) { return double(r.admitted); },
                             [](const ReplicationTotals& r) { return double(r.arrivals); });
    out.p_off = make_interval(poff.point, mean_variance(poff.influence), q, true);
    auto slots = [](const ReplicationTotals& r) { return double(r.slots); };
    const Ratio full = ratio(reps, [](const ReplicationTotals& r) { return double(r.q2_full_slots); }, slots);
    out.p2_full = make_interval(full.point, mean_variance(full.influence), q, true);
    const Ratio adm = ratio(reps, [](const ReplicationTotals& r) { return double(r.admitted); }, slots);
    out.admitted_rate = make_interval(adm.point, mean_variance(adm.influence), q, true);

    auto ok = [&](const Interval& iv) { return iv.point > 0.0 && iv.half_width() <= cfg.relative_accuracy * iv.point; };
    out.converged = ok(out.d_ave) && std::all_of(out.violation.begin(), out.violation.end(), ok);
    return out;
}

SimEstimates simulate(const SystemModel& model, const SimConfig& cfg) {
    cfg.validate();
    std::vector<ReplicationTotals> reps;
    SimEstimates est;
    const std::int64_t budget = cfg.max_slots / cfg.replication_slots;
    for (;;) {
        const std::int64_t done = std::int64_t(reps.size());
        std::int64_t batch = done == 0 ? std::max(cfg.min_replications, cfg.round_size) : cfg.round_size;
        batch = std::min(batch, budget - done);
        if (batch <= 0) break;
        reps.resize(std::size_t(done + batch));
        detail::parallel_for(std::size_t(batch), cfg.threads, [&](std::size_t i) {
            reps[std::size_t(done) + i] = run_replication(model, cfg, std::uint64_t(done) + i);
        });
        est = estimate(reps, cfg);
        if (est.converged) break;
    }
    return est;
}

}  // namespace mecdelay
