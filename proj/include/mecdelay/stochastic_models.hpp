#pragma once

#include "mecdelay/types.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

namespace mecdelay {

inline constexpr double kStochasticTol = 1e-12;

namespace detail {

template <typename Derived>
bool all_in_unit_interval(const Eigen::MatrixBase<Derived>& m) {
    using Scalar = typename Derived::Scalar;
    return ((m.array() >= Scalar(0)) && (m.array() <= Scalar(1))).all();
}

inline std::string index_pair(Index r, Index c) {
    std::ostringstream os;
    os << "(" << r << "," << c << ")";
    return os.str();
}

}  // namespace detail

/// Discrete-time Markovian arrival process (D0, D1).
///
/// (D0)_{ij} is the probability of a phase move i -> j with no arrival in a
/// slot, (D1)_{ij} the probability of the same move with one arrival.
/// Construction validates the invariants and throws ValidationError.
template <typename Scalar>
class DMap {
public:
    DMap(Matrix<Scalar> d0, Matrix<Scalar> d1) : d0_(std::move(d0)), d1_(std::move(d1)) {
        if (d0_.rows() == 0 || d0_.rows() != d0_.cols() || d1_.rows() != d0_.rows() ||
            d1_.cols() != d0_.cols())
            throw ValidationError("D-MAP: D0 and D1 must be square matrices of the same positive order");
        if (!detail::all_in_unit_interval(d0_) || !detail::all_in_unit_interval(d1_))
            throw ValidationError("D-MAP: all entries of D0 and D1 must lie in [0,1]");
        if (!(d0_.array() > Scalar(0)).any())
            throw ValidationError("D-MAP: D0 needs at least one strictly positive entry");
        if (!(d1_.array() > Scalar(0)).any())
            throw ValidationError("D-MAP: D1 needs at least one strictly positive entry");
        const Vector<Scalar> rows = (d0_ + d1_).rowwise().sum();
        for (Index i = 0; i < rows.size(); ++i) {
            if (std::abs(rows(i) - Scalar(1)) > Scalar(kStochasticTol)) {
                std::ostringstream os;
                os << "D-MAP: row " << i << " of D0+D1 sums to " << rows(i) << ", expected 1";
                throw ValidationError(os.str());
            }
        }
    }

    const Matrix<Scalar>& d0() const noexcept { return d0_; }
    const Matrix<Scalar>& d1() const noexcept { return d1_; }
    Matrix<Scalar> generator() const { return d0_ + d1_; }
    Index phases() const noexcept { return d0_.rows(); }

private:
    Matrix<Scalar> d0_;
    Matrix<Scalar> d1_;
};

/// Discrete phase-type distribution (alpha, T) on {1, 2, ...} slots.
template <typename Scalar>
class DPh {
public:
    DPh(RowVector<Scalar> alpha, Matrix<Scalar> t) : alpha_(std::move(alpha)), t_(std::move(t)) {
        if (t_.rows() == 0 || t_.rows() != t_.cols() || alpha_.size() != t_.rows())
            throw ValidationError("D-PH: alpha must have one entry per phase of a square T");
        if (!detail::all_in_unit_interval(alpha_) || !detail::all_in_unit_interval(t_))
            throw ValidationError("D-PH: entries of alpha and T must lie in [0,1]");
        if (std::abs(alpha_.sum() - Scalar(1)) > Scalar(kStochasticTol))
            throw ValidationError("D-PH: alpha must sum to 1 (durations are at least one slot)");
        const Vector<Scalar> rows = t_.rowwise().sum();
        for (Index i = 0; i < rows.size(); ++i) {
            if (rows(i) > Scalar(1) + Scalar(kStochasticTol)) {
                std::ostringstream os;
                os << "D-PH: row " << i << " of T sums to " << rows(i) << " > 1";
                throw ValidationError(os.str());
            }
        }
        const Matrix<Scalar> a = Matrix<Scalar>::Identity(order(), order()) - t_;
        Eigen::FullPivLU<Matrix<Scalar>> lu(a);
        if (!lu.isInvertible())
            throw ValidationError("D-PH: I - T is singular (absorption is not certain)");
        fundamental_ = lu.inverse();
        exit_ = (Vector<Scalar>::Ones(order()) - rows).cwiseMax(Scalar(0));
    }

    const RowVector<Scalar>& alpha() const noexcept { return alpha_; }
    const Matrix<Scalar>& t() const noexcept { return t_; }
    /// Absorption vector T0 = e - T e.
    const Vector<Scalar>& exit() const noexcept { return exit_; }
    /// (I - T)^{-1}.
    const Matrix<Scalar>& fundamental() const noexcept { return fundamental_; }
    Index order() const noexcept { return t_.rows(); }

private:
    RowVector<Scalar> alpha_;
    Matrix<Scalar> t_;
    Vector<Scalar> exit_;
    Matrix<Scalar> fundamental_;
};

/// Stationary vector pi of D = D0 + D1 (pi D = pi, pi e = 1).
template <typename Scalar>
RowVector<Scalar> dmap_stationary(const DMap<Scalar>& dmap) {
    const Index m = dmap.phases();
    if (m == 1) return RowVector<Scalar>::Ones(1);
    const Matrix<Scalar> a = (dmap.generator() - Matrix<Scalar>::Identity(m, m)).transpose();
    Eigen::FullPivLU<Matrix<Scalar>> rank_probe(a);
    rank_probe.setThreshold(Scalar(1e-10));
    if (rank_probe.rank() < m - 1)
        throw ValidationError(
            "D-MAP: D = D0 + D1 has no unique stationary vector (more than one closed class)");
    Matrix<Scalar> sys = a;
    sys.row(m - 1).setOnes();
    Vector<Scalar> rhs = Vector<Scalar>::Zero(m);
    rhs(m - 1) = Scalar(1);
    RowVector<Scalar> pi = sys.fullPivLu().solve(rhs).transpose();
    pi = pi.cwiseMax(Scalar(0));
    return pi / pi.sum();
}

/// Mean number of arrivals per slot, lambda = pi D1 e.
template <typename Scalar>
Scalar dmap_arrival_rate(const DMap<Scalar>& dmap) {
    return (dmap_stationary(dmap) * dmap.d1()).sum();
}

/// Mean duration in slots, alpha (I - T)^{-1} e.
template <typename Scalar>
Scalar dph_mean(const DPh<Scalar>& dph) {
    return (dph.alpha() * dph.fundamental()).sum();
}

/// Probability of a duration of exactly n slots, alpha T^{n-1} T0.
template <typename Scalar>
Scalar dph_pmf(const DPh<Scalar>& dph, Index n) {
    if (n < 1) throw std::invalid_argument("dph_pmf: n must be at least 1");
    RowVector<Scalar> v = dph.alpha();
    for (Index k = 1; k < n; ++k) v = v * dph.t();
    return v.dot(dph.exit().transpose());
}

/// pmf values p_1..p_K where K is the first n with tail mass below `tail_eps`
/// (or `n_max`).
template <typename Scalar>
std::vector<Scalar> dph_pmf_series(const DPh<Scalar>& dph, Scalar tail_eps, Index n_max = 1'000'000) {
    std::vector<Scalar> out;
    RowVector<Scalar> v = dph.alpha();
    Scalar cumulative{0};
    for (Index n = 1; n <= n_max; ++n) {
        const Scalar p = v.dot(dph.exit().transpose());
        out.push_back(p);
        cumulative += p;
        if (Scalar(1) - cumulative < tail_eps) break;
        v = v * dph.t();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sampling

/// Uniform double in [0,1) from a 64-bit engine.
template <typename URBG>
double uniform01(URBG& rng) {
    static_assert(sizeof(typename URBG::result_type) >= 8, "uniform01 expects a 64-bit engine");
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Cumulative probability rows for repeated categorical draws.
class CategoricalTable {
public:
    CategoricalTable() = default;

    void add_row(std::span<const double> probs) {
        offsets_.push_back(cumulative_.size());
        double acc = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t k = 0; k < probs.size(); ++k) {
            acc += probs[k];
            if (probs[k] > 0.0) last_positive = k;
            cumulative_.push_back(acc);
        }
        widths_.push_back(probs.size());
        last_positive_.push_back(last_positive);
    }

    std::size_t draw(std::size_t row, double u) const {
        const std::size_t off = offsets_[row];
        const std::size_t width = widths_[row];
        for (std::size_t k = 0; k < width; ++k)
            if (u < cumulative_[off + k]) return k;
        return last_positive_[row];
    }

    std::size_t rows() const noexcept { return offsets_.size(); }

private:
    std::vector<double> cumulative_;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> widths_;
    std::vector<std::size_t> last_positive_;
};

/// Slot-level sampler for a D-PH absorbing chain. Outcome indices
/// 0..k-1 are phase moves, k is absorption.
class DPhSampler {
public:
    explicit DPhSampler(const DPh<double>& dph) : order_(static_cast<std::size_t>(dph.order())) {
        std::vector<double> row(order_);
        for (std::size_t k = 0; k < order_; ++k) row[k] = dph.alpha()(static_cast<Index>(k));
        initial_.add_row(row);
        row.resize(order_ + 1);
        for (std::size_t i = 0; i < order_; ++i) {
            for (std::size_t k = 0; k < order_; ++k)
                row[k] = dph.t()(static_cast<Index>(i), static_cast<Index>(k));
            row[order_] = dph.exit()(static_cast<Index>(i));
            steps_.add_row(row);
        }
    }

    template <typename URBG>
    int initial(URBG& rng) const {
        return static_cast<int>(initial_.draw(0, uniform01(rng)));
    }

    /// Next phase, or -1 when the duration ends in this slot.
    template <typename URBG>
    int step(int phase, URBG& rng) const {
        const std::size_t k = steps_.draw(static_cast<std::size_t>(phase), uniform01(rng));
        return k == order_ ? -1 : static_cast<int>(k);
    }

    std::size_t order() const noexcept { return order_; }

private:
    std::size_t order_;
    CategoricalTable initial_;
    CategoricalTable steps_;
};

struct DMapOutcome {
    int next_phase;
    bool arrived;
};

/// Slot-level sampler for a D-MAP phase chain.
class DMapSampler {
public:
    explicit DMapSampler(const DMap<double>& dmap) : m_(static_cast<std::size_t>(dmap.phases())) {
        std::vector<double> row(2 * m_);
        for (std::size_t i = 0; i < m_; ++i) {
            for (std::size_t j = 0; j < m_; ++j) {
                row[j] = dmap.d0()(static_cast<Index>(i), static_cast<Index>(j));
                row[m_ + j] = dmap.d1()(static_cast<Index>(i), static_cast<Index>(j));
            }
            steps_.add_row(row);
        }
        const RowVectorXd pi = dmap_stationary(dmap);
        initial_.add_row(std::span<const double>(pi.data(), static_cast<std::size_t>(pi.size())));
    }

    template <typename URBG>
    int stationary_phase(URBG& rng) const {
        return static_cast<int>(initial_.draw(0, uniform01(rng)));
    }

    template <typename URBG>
    DMapOutcome step(int phase, URBG& rng) const {
        const std::size_t k = steps_.draw(static_cast<std::size_t>(phase), uniform01(rng));
        return {static_cast<int>(k % m_), k >= m_};
    }

private:
    std::size_t m_;
    CategoricalTable steps_;
    CategoricalTable initial_;
};

/// Duration in slots drawn by running the absorbing phase chain slot by slot.
template <typename URBG>
Index dph_sample(const DPh<double>& dph, URBG& rng) {
    const Index k = dph.order();
    auto pick = [&](auto&& prob_of, Index width) {
        const double u = uniform01(rng);
        double acc = 0.0;
        Index last = 0;
        for (Index j = 0; j < width; ++j) {
            const double p = prob_of(j);
            acc += p;
            if (p > 0.0) last = j;
            if (u < acc) return j;
        }
        return last;
    };
    Index phase = pick([&](Index j) { return dph.alpha()(j); }, k);
    Index slots = 1;
    for (;;) {
        const Index next =
            pick([&](Index j) { return j < k ? dph.t()(phase, j) : dph.exit()(phase); }, k + 1);
        if (next == k) return slots;
        phase = next;
        ++slots;
    }
}

/// One slot of the arrival chain from `phase` (0-based).
template <typename URBG>
DMapOutcome dmap_step(const DMap<double>& dmap, int phase, URBG& rng) {
    const Index m = dmap.phases();
    const double u = uniform01(rng);
    double acc = 0.0;
    DMapOutcome last{0, false};
    for (Index k = 0; k < 2 * m; ++k) {
        const bool arrived = k >= m;
        const Index j = k % m;
        const double p = arrived ? dmap.d1()(phase, j) : dmap.d0()(phase, j);
        acc += p;
        if (p > 0.0) last = {static_cast<int>(j), arrived};
        if (u < acc) return {static_cast<int>(j), arrived};
    }
    return last;
}

// ---------------------------------------------------------------------------
// Multi-access data rates

enum class MultiAccess { ofdma, noma };

/// Radio parameters of the user whose rate is computed, plus what the other
/// users occupy: their bandwidths (OFDMA) or received powers p_n |h_n|^2 (NOMA).
template <typename Scalar>
struct AccessLink {
    Scalar bandwidth{};
    Scalar power{};
    Scalar channel_gain{};
    Scalar noise{};
    std::vector<Scalar> other_bandwidths;
    std::vector<Scalar> other_received_powers;
};

template <typename Scalar>
Scalar multi_access_rate(MultiAccess mode, const AccessLink<Scalar>& link) {
    using std::log2;
    if (!(link.bandwidth > Scalar(0))) throw std::invalid_argument("multi_access_rate: bandwidth must be positive");
    if (!(link.noise > Scalar(0))) throw std::invalid_argument("multi_access_rate: noise power must be positive");
    if (link.power < Scalar(0) || link.channel_gain < Scalar(0))
        throw std::invalid_argument("multi_access_rate: power and gain must be nonnegative");
    const Scalar signal = link.power * link.channel_gain;
    if (mode == MultiAccess::ofdma) {
        const Scalar used =
            std::accumulate(link.other_bandwidths.begin(), link.other_bandwidths.end(), Scalar(0));
        const Scalar residual = link.bandwidth - used;
        if (residual < Scalar(0))
            throw std::invalid_argument("multi_access_rate: other users occupy more than the shared bandwidth");
        return residual * log2(Scalar(1) + signal / link.noise);
    }
    Scalar interference{0};
    for (Scalar p : link.other_received_powers) {
        if (p < Scalar(0)) throw std::invalid_argument("multi_access_rate: interference powers must be nonnegative");
        interference += p;
    }
    return link.bandwidth * log2(Scalar(1) + signal / (link.noise + interference));
}

}  // namespace mecdelay
