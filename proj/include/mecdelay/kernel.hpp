#pragma once

#include "mecdelay/state_space.hpp"
#include "mecdelay/stochastic_models.hpp"
#include "mecdelay/types.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <array>
#include <map>
#include <sstream>
#include <utility>
#include <vector>

namespace mecdelay {

template <typename A, typename B>
auto kron(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    using Scalar = typename A::Scalar;
    Matrix<Scalar> out = Eigen::kroneckerProduct(a.derived(), b.derived());
    return out;
}

template <typename A, typename B, typename C>
auto kron(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b, const Eigen::MatrixBase<C>& c) {
    return kron(a, kron(b, c));
}

/// Which arrival-process factor multiplies a Kronecker term.
enum class ArrivalTag : unsigned char {
    d0,        ///< no arrival
    d1,        ///< one arrival, admitted
    d,         ///< D0 + D1: arrival (if any) is rejected
    identity,  ///< arrival phase frozen (censored chain)
};

/// The seven level-block families of the level-tridiagonal kernel.
enum class BlockFamily : unsigned char { m0, m1, m2, m3, m3p, m4, m5 };

inline constexpr std::array<BlockFamily, 7> kAllFamilies{BlockFamily::m0, BlockFamily::m1, BlockFamily::m2,
                                                         BlockFamily::m3, BlockFamily::m3p, BlockFamily::m4,
                                                         BlockFamily::m5};

inline const char* family_name(BlockFamily f) {
    constexpr std::array<const char*, 7> names{"M0", "M1", "M2", "M3", "M3p", "M4", "M5"};
    return names[static_cast<std::size_t>(f)];
}

/// Level of the source/target rows of a family, collapsed to 0 or "any
/// level >= 1" (all levels >= 1 share one block layout).
constexpr int family_source_level(BlockFamily f) {
    return f == BlockFamily::m0 || f == BlockFamily::m1 ? 0 : 1;
}
constexpr int family_target_level(BlockFamily f) {
    return f == BlockFamily::m0 || f == BlockFamily::m2 ? 0 : 1;
}

enum class KernelKind : unsigned char { full, hat, tilde };

/// tag (x) rest, placed at (row_offset, col_offset) inside its (i2, i2') sub-block.
template <typename Scalar>
struct KernelTerm {
    ArrivalTag tag;
    Matrix<Scalar> rest;
    Index row_offset = 0;
    Index col_offset = 0;
};

/// Block family {M0, M1, M2, M3, M3', M4, M5} of the one-step kernel, kept
/// as Kronecker terms tagged with their arrival factor so the admitted-arrival
/// (hat) and censored (tilde) variants derive mechanically from it.
template <typename Scalar>
class LevelKernel {
public:
    using SubBlockKey = std::pair<int, int>;
    using TermMap = std::map<SubBlockKey, std::vector<KernelTerm<Scalar>>>;

    LevelKernel(PhaseLayout layout, Matrix<Scalar> d0, Matrix<Scalar> d1, KernelKind kind,
                std::array<TermMap, 7> terms)
        : layout_(std::move(layout)), d0_(std::move(d0)), d1_(std::move(d1)), kind_(kind), terms_(std::move(terms)) {
        for (BlockFamily f : kAllFamilies) dense_[idx(f)] = materialize(f);
    }

    const PhaseLayout& layout() const noexcept { return layout_; }
    KernelKind kind() const noexcept { return kind_; }
    const TermMap& terms(BlockFamily f) const { return terms_[idx(f)]; }
    const std::array<TermMap, 7>& all_terms() const noexcept { return terms_; }
    const Matrix<Scalar>& d0() const noexcept { return d0_; }
    const Matrix<Scalar>& d1() const noexcept { return d1_; }

    /// Dense level block of family f.
    const Matrix<Scalar>& level_block(BlockFamily f) const { return dense_[idx(f)]; }

    /// Dense (row_i2, col_i2) sub-block of family f (zero when structurally absent).
    Matrix<Scalar> sub_block(BlockFamily f, int row_i2, int col_i2) const {
        const int src = family_source_level(f), tgt = family_target_level(f);
        return level_block(f).block(layout_.block_offset_in_level(src, row_i2),
                                    layout_.block_offset_in_level(tgt, col_i2), layout_.block_dim(src, row_i2),
                                    layout_.block_dim(tgt, col_i2));
    }

    Matrix<Scalar> arrival_factor(ArrivalTag tag) const {
        switch (tag) {
            case ArrivalTag::d0: return d0_;
            case ArrivalTag::d1: return d1_;
            case ArrivalTag::d: return d0_ + d1_;
            case ArrivalTag::identity: return Matrix<Scalar>::Identity(d0_.rows(), d0_.cols());
        }
        return {};
    }

private:
    static constexpr std::size_t idx(BlockFamily f) { return static_cast<std::size_t>(f); }

    Matrix<Scalar> materialize(BlockFamily f) const {
        const int src = family_source_level(f), tgt = family_target_level(f);
        Matrix<Scalar> out = Matrix<Scalar>::Zero(layout_.level_dim(src), layout_.level_dim(tgt));
        for (const auto& [key, list] : terms_[idx(f)]) {
            const auto [r, c] = key;
            const Index row0 = layout_.block_offset_in_level(src, r);
            const Index col0 = layout_.block_offset_in_level(tgt, c);
            const Index rows = layout_.block_dim(src, r), cols = layout_.block_dim(tgt, c);
            for (const auto& term : list) {
                const Matrix<Scalar> a = arrival_factor(term.tag);
                const Index tr = a.rows() * term.rest.rows(), tc = a.cols() * term.rest.cols();
                if (term.row_offset + tr > rows || term.col_offset + tc > cols) {
                    std::ostringstream os;
                    os << family_name(f) << " sub-block (" << r << "," << c << "): term of size " << tr << "x" << tc
                       << " at (" << term.row_offset << "," << term.col_offset << ") exceeds block " << rows << "x"
                       << cols;
                    throw ConfigError("kernel", os.str());
                }
                out.block(row0 + term.row_offset, col0 + term.col_offset, tr, tc) += kron(a, term.rest);
            }
        }
        return out;
    }

    PhaseLayout layout_;
    Matrix<Scalar> d0_, d1_;
    KernelKind kind_;
    std::array<TermMap, 7> terms_;
    std::array<Matrix<Scalar>, 7> dense_;
};

/// Build every level block of the one-step kernel from the Kronecker block
/// formulas.
template <typename Scalar>
LevelKernel<Scalar> build_blocks(const DMap<Scalar>& arrivals, const DPh<Scalar>& transmission,
                                 const DPh<Scalar>& computation, const DPh<Scalar>& vacation,
                                 const PhaseLayout& layout) {
    if (layout.m() != arrivals.phases() || layout.n1() != transmission.order() ||
        layout.n2() != computation.order() || layout.l2() != vacation.order())
        throw ConfigError("layout", "phase counts of the layout do not match the D-MAP/D-PH orders");

    using M = Matrix<Scalar>;
    const M S1 = transmission.t(), S10 = transmission.exit(), b1 = transmission.alpha();
    const M S2 = computation.t(), S20 = computation.exit(), b2 = computation.alpha();
    const M V = vacation.t(), V0 = vacation.exit(), v = vacation.alpha();
    const M one = M::Ones(1, 1);
    const M S10b1 = S10 * b1, S20b2 = S20 * b2, V0v = V0 * v, V0b1 = V0 * b1, S10b2 = S10 * b2, S20b1 = S20 * b1;

    const int N2 = layout.N2();
    const Index tau2 = layout.tau2(), tau3 = layout.tau3();

    std::array<typename LevelKernel<Scalar>::TermMap, 7> terms;
    auto add = [&](BlockFamily f, int r, int c, ArrivalTag tag, const M& rest, Index ro, Index co) {
        terms[static_cast<std::size_t>(f)][{r, c}].push_back(KernelTerm<Scalar>{tag, rest, ro, co});
    };

    // Level 0 -> level 0: queue 2 only.
    add(BlockFamily::m0, 0, 0, ArrivalTag::d0, one, 0, 0);
    add(BlockFamily::m0, 1, 0, ArrivalTag::d0, S20, 0, 0);
    for (int i = 1; i <= N2; ++i) add(BlockFamily::m0, i, i, ArrivalTag::d0, S2, 0, 0);
    for (int i = 2; i <= N2; ++i) add(BlockFamily::m0, i, i - 1, ArrivalTag::d0, S20b2, 0, 0);

    // Level 0 -> level 1: an arrival starts transmission, or a vacation if queue 2 stays full.
    add(BlockFamily::m1, 0, 0, ArrivalTag::d1, b1, 0, tau3);
    add(BlockFamily::m1, 1, 0, ArrivalTag::d1, kron(b1, S20), 0, tau3);
    for (int i = 1; i < N2; ++i) add(BlockFamily::m1, i, i, ArrivalTag::d1, kron(b1, S2), 0, tau2);
    for (int i = 2; i <= N2; ++i) add(BlockFamily::m1, i, i - 1, ArrivalTag::d1, kron(b1, S20b2), 0, tau2);
    add(BlockFamily::m1, N2, N2, ArrivalTag::d1, kron(v, S2), 0, 0);

    // Level 1 -> level 0: the last queue-1 task is delivered.
    add(BlockFamily::m2, 0, 1, ArrivalTag::d0, S10b2, tau3, 0);
    for (int i = 1; i < N2; ++i) {
        add(BlockFamily::m2, i, i, ArrivalTag::d0, kron(S10, S20b2), tau2, 0);
        add(BlockFamily::m2, i, i + 1, ArrivalTag::d0, kron(S10, S2), tau2, 0);
    }

    // Transitions with no delivery out of queue 1 (vacation/transmission continue,
    // vacation expiry, queue-2 service). Used by M3 (d0), M3' (d) and M4 (d1).
    auto add_no_delivery = [&](BlockFamily f, ArrivalTag tag) {
        add(f, 0, 0, tag, V, 0, 0);
        add(f, 0, 0, tag, V0b1, 0, tau3);
        add(f, 0, 0, tag, S1, tau3, tau3);
        add(f, 1, 0, tag, kron(V, S20), 0, 0);
        add(f, 1, 0, tag, kron(V0, S20b1), 0, tau3);
        add(f, 1, 0, tag, kron(S1, S20), tau2, tau3);
        for (int i = 1; i < N2; ++i) {
            add(f, i, i, tag, kron(V, S2), 0, 0);
            add(f, i, i, tag, kron(V0, b1, S2), 0, tau2);
            add(f, i, i, tag, kron(S1, S2), tau2, tau2);
        }
        for (int i = 2; i < N2; ++i) {
            add(f, i, i - 1, tag, kron(V, S20b2), 0, 0);
            add(f, i, i - 1, tag, kron(V0, b1, S20b2), 0, tau2);
            add(f, i, i - 1, tag, kron(S1, S20b2), tau2, tau2);
        }
        add(f, N2, N2 - 1, tag, kron(V, S20b2), 0, 0);
        add(f, N2, N2 - 1, tag, kron(V0, b1, S20b2), 0, tau2);
        add(f, N2, N2, tag, kron(V, S2), 0, 0);
        add(f, N2, N2, tag, kron(V0v, S2), 0, 0);
    };

    // A queue-1 delivery while another task remains in queue 1. Used by
    // M3/M3' (d1: an arrival replaces the delivered task) and M5 (d0).
    auto add_delivery = [&](BlockFamily f, ArrivalTag tag) {
        add(f, 0, 1, tag, kron(S10b1, b2), tau3, tau2);
        for (int i = 1; i < N2; ++i) {
            add(f, i, i, tag, kron(S10b1, S20b2), tau2, tau2);
            if (i + 1 < N2)
                add(f, i, i + 1, tag, kron(S10b1, S2), tau2, tau2);
            else
                add(f, i, i + 1, tag, kron(v, S10, S2), tau2, 0);
        }
    };

    add_no_delivery(BlockFamily::m3, ArrivalTag::d0);
    add_delivery(BlockFamily::m3, ArrivalTag::d1);
    add_no_delivery(BlockFamily::m3p, ArrivalTag::d);
    add_delivery(BlockFamily::m3p, ArrivalTag::d1);
    add_no_delivery(BlockFamily::m4, ArrivalTag::d1);
    add_delivery(BlockFamily::m5, ArrivalTag::d0);

    return LevelKernel<Scalar>(layout, arrivals.d0(), arrivals.d1(), KernelKind::full, std::move(terms));
}

/// Place the level blocks into the full kernel over the state space.
///
///   [M0 M1            ]
///   [M2 M3 M4         ]
///   [   M5 M3 M4      ]
///   [        ...      ]
///   [           M5 M3']
template <typename Scalar>
Matrix<Scalar> assemble(const LevelKernel<Scalar>& kernel) {
    const PhaseLayout& L = kernel.layout();
    const int N1 = L.N1();
    Matrix<Scalar> P = Matrix<Scalar>::Zero(L.total(), L.total());
    auto place = [&](int from, int to, BlockFamily f) {
        const Matrix<Scalar>& b = kernel.level_block(f);
        P.block(L.level_offset(from), L.level_offset(to), b.rows(), b.cols()) = b;
    };
    place(0, 0, BlockFamily::m0);
    place(0, 1, BlockFamily::m1);
    place(1, 0, BlockFamily::m2);
    for (int i = 1; i <= N1; ++i) {
        place(i, i, i == N1 ? BlockFamily::m3p : BlockFamily::m3);
        if (i < N1) place(i, i + 1, BlockFamily::m4);
        if (i >= 2) place(i, i - 1, BlockFamily::m5);
    }
    return P;
}

/// Keep only transitions in which a task enters queue 1 (terms carrying D1).
template <typename Scalar>
LevelKernel<Scalar> build_hat(const LevelKernel<Scalar>& kernel) {
    auto terms = kernel.all_terms();
    for (auto& family : terms) {
        for (auto& [key, list] : family) {
            std::erase_if(list, [](const KernelTerm<Scalar>& t) { return t.tag != ArrivalTag::d1; });
        }
    }
    return LevelKernel<Scalar>(kernel.layout(), kernel.d0(), kernel.d1(), KernelKind::hat, std::move(terms));
}

/// Arrival-censored kernel for a tagged task: D0 and D become the identity,
/// terms with an admitted arrival are removed, and level (0,0) is absorbing.
template <typename Scalar>
LevelKernel<Scalar> build_tilde(const LevelKernel<Scalar>& kernel, Scalar check_tol = Scalar(1e-10)) {
    auto terms = kernel.all_terms();
    for (auto& family : terms) {
        for (auto& [key, list] : family) {
            std::erase_if(list, [](const KernelTerm<Scalar>& t) { return t.tag == ArrivalTag::d1; });
            for (auto& t : list) t.tag = ArrivalTag::identity;
        }
    }
    LevelKernel<Scalar> tilde(kernel.layout(), kernel.d0(), kernel.d1(), KernelKind::tilde, std::move(terms));

    const Matrix<Scalar> P = assemble(tilde);
    const Vector<Scalar> rows = P.rowwise().sum();
    for (Index i = 0; i < rows.size(); ++i) {
        if (std::abs(rows(i) - Scalar(1)) > check_tol) {
            std::ostringstream os;
            os << "censored kernel row " << i << " " << to_string(tilde.layout().state(i)) << " sums to " << rows(i);
            throw SolverError(os.str());
        }
    }
    return tilde;
}

/// Arrival-censored and admitted-arrival kernels, packaged together.
template <typename Scalar>
struct TaggedKernels {
    LevelKernel<Scalar> hat;
    LevelKernel<Scalar> tilde;
};

template <typename Scalar>
TaggedKernels<Scalar> build_tagged(const LevelKernel<Scalar>& kernel) {
    return {build_hat(kernel), build_tilde(kernel)};
}

}  // namespace mecdelay
