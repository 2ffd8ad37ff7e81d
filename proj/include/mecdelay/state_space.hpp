#pragma once

#include "mecdelay/types.hpp"

#include <compare>
#include <string>
#include <vector>

namespace mecdelay {

enum class ServerMode : unsigned char { idle, vacation, serving };

/// One state (i1, i2, phase) of the tandem chain. All phase indices are
/// 0-based; `phase1` is the vacation phase while on vacation and the
/// transmission phase while serving, and is -1 when queue 1 is empty.
/// `phase2` is -1 when queue 2 is empty.
struct State {
    int i1 = 0;
    int i2 = 0;
    ServerMode mode = ServerMode::idle;
    int arrival_phase = 0;
    int phase1 = -1;
    int phase2 = -1;

    auto operator<=>(const State&) const = default;
};

std::string to_string(const State& s);

/// The state space of the chain with a bijective flat index.
///
/// States are grouped by level i1, then by queue-2 length i2. Inside each
/// (i1, i2) block the vacation states precede the serving states and each
/// part is ordered with the arrival phase outermost and the computation phase
/// innermost, which is the factor order of the Kronecker block formulas.
class PhaseLayout {
public:
    PhaseLayout(int m, int n1, int n2, int l2, int N1, int N2);

    int m() const noexcept { return m_; }
    int n1() const noexcept { return n1_; }
    int n2() const noexcept { return n2_; }
    int l2() const noexcept { return l2_; }
    int N1() const noexcept { return N1_; }
    int N2() const noexcept { return N2_; }

    Index tau1() const noexcept { return Index(m_) * l2_ + Index(m_) * n1_; }
    Index tau2() const noexcept { return Index(m_) * l2_ * n2_; }
    Index tau3() const noexcept { return Index(m_) * l2_; }
    Index tau4() const noexcept { return Index(m_) * n2_; }
    Index tau5() const noexcept { return Index(m_) * n1_ * n2_; }

    Index block_dim(int i1, int i2) const;
    /// Rows of the vacation part of block (i1, i2), i1 >= 1. The serving
    /// part (when present) starts at this offset inside the block.
    Index vacation_dim(int i1, int i2) const;
    /// Flat index of the first state of block (i1, i2).
    Index block_offset(int i1, int i2) const;
    /// Offset of block (i1, i2) relative to the start of its level.
    Index block_offset_in_level(int i1, int i2) const;

    Index level_dim(int i1) const;
    Index level_offset(int i1) const;
    Index total() const noexcept { return level_offset(N1_) + level_dim(N1_); }

    bool contains(const State& s) const noexcept;
    Index index(const State& s) const;
    State state(Index flat) const;

    /// All states in flat-index order.
    std::vector<State> enumerate() const;

private:
    int m_, n1_, n2_, l2_, N1_, N2_;
};

PhaseLayout build_layout(int m, int n1, int n2, int l2, int N1, int N2);

}  // namespace mecdelay
