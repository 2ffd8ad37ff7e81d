#include "mecdelay/state_space.hpp"

#include <sstream>
#include <stdexcept>

namespace mecdelay {

std::string to_string(const State& s) {
    std::ostringstream os;
    os << "(" << s.i1 << "," << s.i2 << ";";
    switch (s.mode) {
        case ServerMode::idle: os << "idle"; break;
        case ServerMode::vacation: os << "vac"; break;
        case ServerMode::serving: os << "srv"; break;
    }
    os << ",a=" << s.arrival_phase << ",p1=" << s.phase1 << ",p2=" << s.phase2 << ")";
    return os.str();
}

PhaseLayout::PhaseLayout(int m, int n1, int n2, int l2, int N1, int N2)
    : m_(m), n1_(n1), n2_(n2), l2_(l2), N1_(N1), N2_(N2) {
    if (m < 1 || n1 < 1 || n2 < 1 || l2 < 1)
        throw ConfigError("layout", "phase counts m, n1, n2, l2 must all be at least 1");
    if (N1 < 1 || N1 >= N2)
        throw ConfigError("buffers", "buffer sizes must satisfy 1 <= N1 < N2");
}

PhaseLayout build_layout(int m, int n1, int n2, int l2, int N1, int N2) {
    return PhaseLayout(m, n1, n2, l2, N1, N2);
}

Index PhaseLayout::block_dim(int i1, int i2) const {
    if (i1 < 0 || i1 > N1_ || i2 < 0 || i2 > N2_) throw std::out_of_range("block_dim: level out of range");
    if (i1 == 0) return i2 == 0 ? m_ : tau4();
    if (i2 == 0) return tau1();
    if (i2 < N2_) return tau2() + tau5();
    return tau2();
}

Index PhaseLayout::vacation_dim(int i1, int i2) const {
    if (i1 < 1 || i1 > N1_ || i2 < 0 || i2 > N2_) throw std::out_of_range("vacation_dim: level out of range");
    return i2 == 0 ? tau3() : tau2();
}

Index PhaseLayout::block_offset_in_level(int i1, int i2) const {
    if (i1 < 0 || i1 > N1_ || i2 < 0 || i2 > N2_) throw std::out_of_range("block_offset: level out of range");
    if (i1 == 0) return i2 == 0 ? 0 : m_ + Index(i2 - 1) * tau4();
    if (i2 == 0) return 0;
    return tau1() + Index(i2 - 1) * (tau2() + tau5());
}

Index PhaseLayout::block_offset(int i1, int i2) const {
    return level_offset(i1) + block_offset_in_level(i1, i2);
}

Index PhaseLayout::level_dim(int i1) const {
    if (i1 < 0 || i1 > N1_) throw std::out_of_range("level_dim: level out of range");
    if (i1 == 0) return m_ + Index(N2_) * tau4();
    return tau1() + Index(N2_ - 1) * (tau2() + tau5()) + tau2();
}

Index PhaseLayout::level_offset(int i1) const {
    if (i1 < 0 || i1 > N1_) throw std::out_of_range("level_offset: level out of range");
    if (i1 == 0) return 0;
    return level_dim(0) + Index(i1 - 1) * level_dim(1);
}

bool PhaseLayout::contains(const State& s) const noexcept {
    if (s.i1 < 0 || s.i1 > N1_ || s.i2 < 0 || s.i2 > N2_) return false;
    if (s.arrival_phase < 0 || s.arrival_phase >= m_) return false;
    if (s.i2 == 0 ? s.phase2 != -1 : (s.phase2 < 0 || s.phase2 >= n2_)) return false;
    if (s.i1 == 0) return s.mode == ServerMode::idle && s.phase1 == -1;
    switch (s.mode) {
        case ServerMode::idle: return false;
        case ServerMode::vacation: return s.phase1 >= 0 && s.phase1 < l2_;
        case ServerMode::serving: return s.i2 < N2_ && s.phase1 >= 0 && s.phase1 < n1_;
    }
    return false;
}

Index PhaseLayout::index(const State& s) const {
    if (!contains(s)) throw std::out_of_range("index: " + to_string(s) + " is not a state of the layout");
    const Index base = block_offset(s.i1, s.i2);
    const Index a = s.arrival_phase;
    if (s.i1 == 0) return s.i2 == 0 ? base + a : base + a * n2_ + s.phase2;
    const Index inner = s.mode == ServerMode::vacation ? a * l2_ + s.phase1 : a * n1_ + s.phase1;
    const Index part = s.mode == ServerMode::vacation ? 0 : vacation_dim(s.i1, s.i2);
    if (s.i2 == 0) return base + part + inner;
    return base + part + inner * n2_ + s.phase2;
}

State PhaseLayout::state(Index flat) const {
    if (flat < 0 || flat >= total()) throw std::out_of_range("state: flat index out of range");
    State s;
    if (flat < level_dim(0)) {
        s.i1 = 0;
        if (flat < m_) {
            s.i2 = 0;
            s.arrival_phase = static_cast<int>(flat);
            return s;
        }
        const Index rest = flat - m_;
        s.i2 = static_cast<int>(rest / tau4()) + 1;
        const Index within = rest % tau4();
        s.arrival_phase = static_cast<int>(within / n2_);
        s.phase2 = static_cast<int>(within % n2_);
        return s;
    }
    const Index from_level1 = flat - level_dim(0);
    s.i1 = static_cast<int>(from_level1 / level_dim(1)) + 1;
    Index within_level = from_level1 % level_dim(1);
    if (within_level < tau1()) {
        s.i2 = 0;
    } else {
        const Index rest = within_level - tau1();
        s.i2 = static_cast<int>(rest / (tau2() + tau5())) + 1;
        if (s.i2 > N2_) s.i2 = N2_;
    }
    Index within = within_level - block_offset_in_level(s.i1, s.i2);
    const Index vac = vacation_dim(s.i1, s.i2);
    const bool vacation = within < vac;
    s.mode = vacation ? ServerMode::vacation : ServerMode::serving;
    if (!vacation) within -= vac;
    const Index inner_width = vacation ? l2_ : n1_;
    Index outer = within;
    if (s.i2 > 0) {
        s.phase2 = static_cast<int>(within % n2_);
        outer = within / n2_;
    }
    s.arrival_phase = static_cast<int>(outer / inner_width);
    s.phase1 = static_cast<int>(outer % inner_width);
    return s;
}

std::vector<State> PhaseLayout::enumerate() const {
    std::vector<State> out;
    out.reserve(static_cast<std::size_t>(total()));
    for (int i1 = 0; i1 <= N1_; ++i1) {
        for (int i2 = 0; i2 <= N2_; ++i2) {
            const int p2_count = i2 == 0 ? 1 : n2_;
            auto push_part = [&](ServerMode mode, int width) {
                for (int a = 0; a < m_; ++a)
                    for (int p1 = 0; p1 < width; ++p1)
                        for (int p2 = 0; p2 < p2_count; ++p2)
                            out.push_back(State{i1, i2, mode, a, mode == ServerMode::idle ? -1 : p1,
                                                i2 == 0 ? -1 : p2});
            };
            if (i1 == 0) {
                push_part(ServerMode::idle, 1);
            } else {
                push_part(ServerMode::vacation, l2_);
                if (i2 < N2_) push_part(ServerMode::serving, n1_);
            }
        }
    }
    return out;
}

}  // namespace mecdelay
