#pragma once

#include "oracles.hpp"

namespace fixture {

using oracle::Model;

// Reference parameters, both cases.
inline Model case1() {
    Model M;
    M.d0.resize(2, 2);
    M.d0 << 0.2359, 0.1938, 0.2792, 0.2805;
    M.d1.resize(2, 2);
    M.d1 << 0.1236, 0.4467, 0.2644, 0.1759;
    M.b1 = M.b2 = mecdelay::RowVectorXd::Ones(1);
    M.s1 = mecdelay::MatrixXd::Constant(1, 1, 0.6429);
    M.s2 = mecdelay::MatrixXd::Constant(1, 1, 0.5455);
    M.v.resize(2);
    M.v << 0.6545, 0.3455;
    M.V.resize(2, 2);
    M.V << 0.3035, 0.0617, 0.6738, 0.1916;
    M.N1 = 10;
    M.N2 = 15;
    return M;
}

inline Model case2() {
    Model M = case1();
    M.s1(0, 0) = 0.1667;
    M.v << 0.6969, 0.3031;
    M.V << 0.6378, 0.1007, 0.4613, 0.3278;
    return M;
}

inline mecdelay::SystemModel system(const Model& M) {
    return {M.dmap(), M.transmission(), M.computation(), M.vacation(), M.N1, M.N2};
}

}  // namespace fixture
