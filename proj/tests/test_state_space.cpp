#include "fixtures.hpp"

#include "mecdelay/state_space.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace mecdelay;

TEST_CASE("toy layout block dimensions") {
    const PhaseLayout L(1, 1, 1, 1, 1, 2);
    CHECK(L.block_dim(0, 0) == 1);
    CHECK(L.block_dim(0, 1) == 1);
    CHECK(L.block_dim(0, 2) == 1);
    CHECK(L.block_dim(1, 0) == 2);
    CHECK(L.block_dim(1, 1) == 2);
    CHECK(L.block_dim(1, 2) == 1);
    CHECK(L.total() == 8);
}

TEST_CASE("case-1 layout") {
    const PhaseLayout L(2, 1, 1, 2, 10, 15);
    CHECK(L.total() == 972);
    CHECK(L.tau1() == 6);
    CHECK(L.tau2() == 4);
    CHECK(L.tau3() == 4);
    CHECK(L.tau4() == 2);
    CHECK(L.tau5() == 2);
    for (int i1 = 1; i1 <= 10; ++i1) CHECK(L.block_dim(i1, 15) == L.tau2());
    CHECK(L.block_offset(1, 0) == 2 + 15 * 2);
    CHECK(L.index(State{0, 0, ServerMode::idle, 0, -1, -1}) == 0);
}

TEST_CASE("closed-form dimension and bijective index") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 60; ++trial) {
        const auto M = oracle::random_model(rng);
        const PhaseLayout L = M.layout();
        const Index closed = Index(L.m()) + Index(L.N2()) * L.tau4() +
                             Index(L.N1()) * (L.tau1() + Index(L.N2() - 1) * (L.tau2() + L.tau5()) + L.tau2());
        CHECK(L.total() == closed);
        const auto states = L.enumerate();
        REQUIRE(Index(states.size()) == closed);
        std::set<Index> seen;
        for (std::size_t k = 0; k < states.size(); ++k) {
            const Index i = L.index(states[k]);
            CHECK(i == Index(k));
            CHECK(L.state(i) == states[k]);
            seen.insert(i);
        }
        CHECK(Index(seen.size()) == closed);
        // blocks are contiguous and ordered by (i1, i2)
        for (const State& s : states) {
            const Index i = L.index(s);
            CHECK(i >= L.block_offset(s.i1, s.i2));
            CHECK(i < L.block_offset(s.i1, s.i2) + L.block_dim(s.i1, s.i2));
        }
    }
}

TEST_CASE("exhaustive round trip on case 1") {
    const PhaseLayout L = fixture::case1().layout();
    for (Index i = 0; i < L.total(); ++i) CHECK(L.index(L.state(i)) == i);
}

TEST_CASE("layout errors") {
    CHECK_THROWS_AS(PhaseLayout(1, 1, 1, 1, 2, 2), ConfigError);
    CHECK_THROWS_AS(PhaseLayout(1, 1, 1, 1, 3, 2), ConfigError);
    CHECK_THROWS_AS(PhaseLayout(0, 1, 1, 1, 1, 2), ConfigError);
    CHECK_THROWS_AS(PhaseLayout(1, 1, 1, 1, 0, 2), ConfigError);
    const PhaseLayout L(1, 1, 1, 1, 1, 2);
    CHECK_THROWS_AS(L.index(State{2, 0, ServerMode::serving, 0, 0, -1}), std::out_of_range);
    CHECK_THROWS_AS(L.index(State{1, 2, ServerMode::serving, 0, 0, 0}), std::out_of_range);
    CHECK_THROWS_AS(L.index(State{1, 0, ServerMode::serving, 1, 0, -1}), std::out_of_range);
    CHECK_THROWS_AS(L.state(8), std::out_of_range);
    CHECK_THROWS_AS(L.block_dim(0, 3), std::out_of_range);
}
