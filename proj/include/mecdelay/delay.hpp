#pragma once

#include "mecdelay/kernel.hpp"
#include "mecdelay/stationary.hpp"
#include "mecdelay/stochastic_models.hpp"
#include "mecdelay/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace mecdelay {

/// y = x P using only the three block diagonals of the level structure.
template <typename Scalar>
RowVector<Scalar> level_multiply(const LevelKernel<Scalar>& k, const RowVector<Scalar>& x) {
    const PhaseLayout& L = k.layout();
    const int N1 = L.N1();
    RowVector<Scalar> y = RowVector<Scalar>::Zero(x.size());
    auto seg = [&](const RowVector<Scalar>& v, int i) { return v.segment(L.level_offset(i), L.level_dim(i)); };
    auto acc = [&](int from, int to, BlockFamily f) {
        y.segment(L.level_offset(to), L.level_dim(to)).noalias() += seg(x, from) * k.level_block(f);
    };
    acc(0, 0, BlockFamily::m0);
    acc(0, 1, BlockFamily::m1);
    acc(1, 0, BlockFamily::m2);
    for (int i = 1; i <= N1; ++i) {
        acc(i, i, i == N1 ? BlockFamily::m3p : BlockFamily::m3);
        if (i < N1) acc(i, i + 1, BlockFamily::m4);
        if (i >= 2) acc(i, i - 1, BlockFamily::m5);
    }
    return y;
}

template <typename Scalar>
struct TaggedState {
    RowVector<Scalar> z;  ///< state just after a task enters queue 1
    Scalar admitted_rate{};  ///< z_hat e, admissions per slot
    Scalar p_off{};
};

/// z = x P_hat / (x P_hat e), P_off = x P_hat e / lambda.
template <typename Scalar>
TaggedState<Scalar> initial_tagged_distribution(const RowVector<Scalar>& x, const LevelKernel<Scalar>& hat,
                                                Scalar lambda) {
    if (hat.kind() != KernelKind::hat) throw std::invalid_argument("initial_tagged_distribution: expects the hat kernel");
    TaggedState<Scalar> out;
    const RowVector<Scalar> zhat = level_multiply(hat, x);
    out.admitted_rate = zhat.sum();
    if (!(out.admitted_rate > Scalar(0)))
        throw SolverError("no task can ever enter queue 1 (admission probability is zero)");
    out.z = zhat / out.admitted_rate;
    out.p_off = out.admitted_rate / lambda;
    return out;
}

template <typename Scalar>
struct DelayCpd {
    std::vector<Scalar> cpd;  ///< cpd[n] = P(delay <= n), cpd[0] = 0
    Index n_stop = 0;
    Scalar tail{};             ///< 1 - cpd[n_stop]
    bool truncated = false;    ///< n_max reached before the tail criteria held
    Scalar mass_drift{};       ///< max_n |x~(n) e - 1|
    Scalar decay_rate{};       ///< per-slot tail decay estimated over the last ten slots
    Scalar tail_mean_bound{};  ///< bound on the mean contribution beyond n_stop
};

/// Tail criteria of the CPD iteration: stop once 1 - W_n < eps_tail and
/// n (1 - W_n) < mean_tail_eps, or at n_max.
template <typename Scalar>
struct TailPolicy {
    Scalar eps_tail = Scalar(1e-10);
    Index n_max = 100000;
    Scalar mean_tail_eps = Scalar(1e-6);
};

/// P(delay <= n) as the mass absorbed in (0,0) after n censored steps from z.
template <typename Scalar>
DelayCpd<Scalar> delay_cpd(const RowVector<Scalar>& z, const LevelKernel<Scalar>& tilde,
                           const TailPolicy<Scalar>& policy = {}) {
    if (tilde.kind() != KernelKind::tilde) throw std::invalid_argument("delay_cpd: expects the tilde kernel");
    if (!(policy.eps_tail > Scalar(0)) || policy.n_max < 1)
        throw std::invalid_argument("delay_cpd: eps_tail must be positive and n_max at least 1");
    const Index m = tilde.layout().m();
    DelayCpd<Scalar> out;
    out.cpd.push_back(Scalar(0));
    RowVector<Scalar> xt = z;
    for (Index n = 1; n <= policy.n_max; ++n) {
        xt = level_multiply(tilde, xt);
        out.mass_drift = std::max(out.mass_drift, std::abs(xt.sum() - Scalar(1)));
        const Scalar absorbed = std::min(Scalar(1), xt.head(m).sum());
        out.cpd.push_back(absorbed);
        out.n_stop = n;
        const Scalar tail = Scalar(1) - absorbed;
        if (tail < policy.eps_tail && Scalar(n) * tail < policy.mean_tail_eps) break;
    }
    out.tail = Scalar(1) - out.cpd.back();
    out.truncated = !(out.tail < policy.eps_tail && Scalar(out.n_stop) * out.tail < policy.mean_tail_eps);

    const Index n = out.n_stop;
    if (n > 10) {
        const Scalar now = Scalar(1) - out.cpd[n], before = Scalar(1) - out.cpd[n - 10];
        if (now > Scalar(0) && before > Scalar(0)) out.decay_rate = std::pow(now / before, Scalar(0.1));
    }
    // sum_{k>n} k PW_k = n W_n + sum_{k>=n} W_k, with W_k <= W_n r^{k-n}
    if (out.decay_rate > Scalar(0) && out.decay_rate < Scalar(1))
        out.tail_mean_bound = Scalar(n) * out.tail + out.tail / (Scalar(1) - out.decay_rate);
    else
        out.tail_mean_bound = std::numeric_limits<Scalar>::infinity();
    if (out.tail <= Scalar(0)) out.tail_mean_bound = Scalar(0);
    return out;
}

template <typename Scalar>
struct PmfViolation {
    std::vector<Scalar> pmf;        ///< pmf[n] = PW_n, pmf[0] = 0
    std::vector<Scalar> violation;  ///< violation[n] = W_n = 1 - cpd[n]
};

template <typename Scalar>
PmfViolation<Scalar> delay_pmf_violation(const std::vector<Scalar>& cpd) {
    PmfViolation<Scalar> out;
    out.pmf.assign(cpd.size(), Scalar(0));
    out.violation.resize(cpd.size());
    for (std::size_t n = 0; n < cpd.size(); ++n) {
        out.violation[n] = Scalar(1) - cpd[n];
        if (n == 0) continue;
        Scalar p = cpd[n] - cpd[n - 1];
        if (p < Scalar(0)) {
            if (p < Scalar(-1e-12)) {
                std::ostringstream os;
                os << "delay CPD decreases at n = " << n << " by " << -p;
                throw SolverError(os.str());
            }
            p = Scalar(0);
        }
        out.pmf[n] = p;
    }
    return out;
}

/// Mean number of tasks in the system, sum (i1 + i2) x_{i1,i2} e.
template <typename Scalar>
Scalar mean_tasks_in_system(const RowVector<Scalar>& x, const PhaseLayout& L) {
    Scalar total{0};
    for (int i1 = 0; i1 <= L.N1(); ++i1)
        for (int i2 = 0; i2 <= L.N2(); ++i2)
            total += Scalar(i1 + i2) * x.segment(L.block_offset(i1, i2), L.block_dim(i1, i2)).sum();
    return total;
}

template <typename Scalar>
struct AverageDelay {
    Scalar from_pmf{};     ///< sum n PW_n
    Scalar from_little{};  ///< mean tasks in system / (lambda P_off)
    Scalar rel_diff{};
};

inline constexpr double kLittleRelTol = 1e-4;

/// Both mean-delay estimates. With `enforce`, a relative gap above 1e-4
/// throws SolverError.
template <typename Scalar>
AverageDelay<Scalar> average_delay(const std::vector<Scalar>& pmf, const RowVector<Scalar>& x, const PhaseLayout& L,
                                   Scalar lambda, Scalar p_off, bool enforce = true) {
    AverageDelay<Scalar> out;
    for (std::size_t n = 1; n < pmf.size(); ++n) out.from_pmf += Scalar(n) * pmf[n];
    out.from_little = mean_tasks_in_system(x, L) / (lambda * p_off);
    out.rel_diff = std::abs(out.from_pmf - out.from_little) / out.from_little;
    if (enforce && out.rel_diff > Scalar(kLittleRelTol)) {
        std::ostringstream os;
        os << "average delay by the distribution (" << out.from_pmf << ") and by Little's law (" << out.from_little
           << ") disagree by relative " << out.rel_diff;
        throw SolverError(os.str());
    }
    return out;
}

template <typename Scalar>
Scalar delay_std(const std::vector<Scalar>& pmf, Scalar d_ave) {
    Scalar v{0};
    for (std::size_t n = 1; n < pmf.size(); ++n) {
        const Scalar d = Scalar(n) - d_ave;
        v += pmf[n] * d * d;
    }
    return std::sqrt(v);
}

/// Probability that queue 2 is full, sum_{i1} x_{i1,N2} e.
template <typename Scalar>
Scalar prob_q2_full(const RowVector<Scalar>& x, const PhaseLayout& L) {
    Scalar p{0};
    for (int i1 = 0; i1 <= L.N1(); ++i1) p += x.segment(L.block_offset(i1, L.N2()), L.block_dim(i1, L.N2())).sum();
    return p;
}

struct ModeInfo {
    Index mode = 0;   ///< argmax of the pmf
    int peaks = 0;    ///< strict local maxima at or above the noise floor
    bool unimodal() const noexcept { return peaks <= 1; }
};

/// Peak count of a pmf, ignoring moves smaller than `noise_floor`.
template <typename Scalar>
ModeInfo pmf_modes(const std::vector<Scalar>& pmf, Scalar noise_floor = Scalar(1e-12)) {
    ModeInfo info;
    Scalar best{-1};
    for (std::size_t n = 1; n < pmf.size(); ++n)
        if (pmf[n] > best) best = pmf[n], info.mode = static_cast<Index>(n);
    int dir = 0;
    bool seen_rise = false;
    for (std::size_t n = 1; n + 1 < pmf.size(); ++n) {
        const Scalar d = pmf[n + 1] - pmf[n];
        if (d > noise_floor) {
            dir = 1;
            seen_rise = true;
        } else if (d < -noise_floor) {
            if (dir == 1 || (!seen_rise && dir == 0 && pmf[n] > noise_floor)) ++info.peaks;
            dir = -1;
        }
    }
    if (dir == 1) ++info.peaks;
    return info;
}

/// sum_{n > mode + offset} PW_n.
template <typename Scalar>
Scalar tail_mass_beyond_mode(const std::vector<Scalar>& pmf, Index offset) {
    const Index mode = pmf_modes(pmf).mode;
    Scalar s{0};
    for (std::size_t n = static_cast<std::size_t>(mode + offset) + 1; n < pmf.size(); ++n) s += pmf[n];
    return s;
}

template <typename Scalar>
struct DelayCharacteristics {
    std::vector<Scalar> cpd, pmf, violation;  ///< indexed by n = 0..n_stop
    Scalar d_ave{};         ///< slots, from the distribution
    Scalar d_ave_little{};  ///< slots, from Little's law
    Scalar d_ave_rel_diff{};
    Scalar d_sd{};
    Scalar p_off{};
    Scalar p2_full{};
    Scalar lambda{};
    Scalar admitted_rate{};
    Scalar mean_tasks{};
    Index n_stop = 0;
    Scalar tail{};
    bool truncated = false;
    Scalar mass_drift{};
    Scalar decay_rate{};
    Scalar tail_mean_bound{};
    ModeInfo modes;
    std::optional<double> dt_ms;

    /// W_n; beyond n_stop the last computed tail is an upper bound, returned as is.
    Scalar violation_at(Index n) const {
        if (n < 0) throw std::out_of_range("violation_at: n must be nonnegative");
        return n <= n_stop ? violation[static_cast<std::size_t>(n)] : violation.back();
    }
    std::optional<double> d_ave_ms() const { return dt_ms ? std::optional<double>(double(d_ave) * *dt_ms) : std::nullopt; }
    std::optional<double> d_sd_ms() const { return dt_ms ? std::optional<double>(double(d_sd) * *dt_ms) : std::nullopt; }
};

template <typename Scalar>
struct AnalysisOptions {
    SolveMethod method = SolveMethod::direct;
    TailPolicy<Scalar> tail;
    std::optional<double> dt_ms;
};

template <typename Scalar>
struct Analysis {
    StationaryDistribution<Scalar> stationary;
    DelayCharacteristics<Scalar> delay;
    std::vector<std::string> warnings;
};

/// Full pipeline from blocks to delay characteristics.
template <typename Scalar>
Analysis<Scalar> analyze(const LevelKernel<Scalar>& kernel, Scalar lambda, const AnalysisOptions<Scalar>& opt = {}) {
    Analysis<Scalar> out;
    out.stationary = stationary(kernel, opt.method);
    for (const auto& n : out.stationary.notices) out.warnings.push_back(n);
    const RowVector<Scalar>& x = out.stationary.x;
    const PhaseLayout& L = kernel.layout();
    const TaggedKernels<Scalar> tagged = build_tagged(kernel);

    const TaggedState<Scalar> ts = initial_tagged_distribution(x, tagged.hat, lambda);
    DelayCpd<Scalar> cpd = delay_cpd(ts.z, tagged.tilde, opt.tail);
    if (cpd.truncated) {
        std::ostringstream os;
        os << "delay distribution truncated at n = " << cpd.n_stop << " with tail mass " << cpd.tail;
        out.warnings.push_back(os.str());
    }
    PmfViolation<Scalar> pv = delay_pmf_violation(cpd.cpd);

    auto& d = out.delay;
    const bool exact = out.stationary.method == SolveMethod::direct && !cpd.truncated;
    const AverageDelay<Scalar> avg = average_delay(pv.pmf, x, L, lambda, ts.p_off, exact);
    if (avg.rel_diff > Scalar(kLittleRelTol)) {
        std::ostringstream os;
        os << "average delay by distribution and by Little's law differ by relative " << avg.rel_diff;
        out.warnings.push_back(os.str());
    }
    d.d_ave = avg.from_pmf;
    d.d_ave_little = avg.from_little;
    d.d_ave_rel_diff = avg.rel_diff;
    d.d_sd = delay_std(pv.pmf, d.d_ave);
    d.p_off = ts.p_off;
    d.p2_full = prob_q2_full(x, L);
    d.lambda = lambda;
    d.admitted_rate = ts.admitted_rate;
    d.mean_tasks = mean_tasks_in_system(x, L);
    d.n_stop = cpd.n_stop;
    d.tail = cpd.tail;
    d.truncated = cpd.truncated;
    d.mass_drift = cpd.mass_drift;
    d.decay_rate = cpd.decay_rate;
    d.tail_mean_bound = cpd.tail_mean_bound;
    d.modes = pmf_modes(pv.pmf);
    d.dt_ms = opt.dt_ms;
    d.cpd = std::move(cpd.cpd);
    d.pmf = std::move(pv.pmf);
    d.violation = std::move(pv.violation);
    return out;
}

}  // namespace mecdelay
