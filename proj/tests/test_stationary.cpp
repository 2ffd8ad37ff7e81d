#include "fixtures.hpp"

#include "mecdelay/stationary.hpp"

#include <doctest.h>

#include <random>

using namespace mecdelay;

TEST_CASE("direct solve on small chains") {
    SUBCASE("two-cycle") {
        MatrixXd P(2, 2);
        P << 0, 1, 1, 0;
        const auto s = solve_direct(P);
        CHECK(s.x(0) == doctest::Approx(0.5));
        CHECK(s.x(1) == doctest::Approx(0.5));
    }
    SUBCASE("toy layout against power iteration") {
        const auto K = oracle::toy_model().kernel();
        const MatrixXd P = assemble(K);
        const auto s = solve_direct(P);
        const RowVectorXd pw = oracle::power_iteration(P, 1000000);
        CHECK((s.x - pw).cwiseAbs().maxCoeff() < 1e-9);
    }
    SUBCASE("reducible chain is rejected") {
        CHECK_THROWS_AS(solve_direct<double>(MatrixXd::Identity(3, 3)), SolverError);
    }
}

TEST_CASE("direct solve invariants over random configs") {
    std::mt19937_64 rng(77);
    for (int k = 0; k < 50; ++k) {
        const auto M = oracle::random_model(rng);
        const MatrixXd P = assemble(M.kernel());
        const auto s = solve_direct(P);
        CHECK(s.residual < 1e-10);
        CHECK(std::abs(s.x.sum() - 1.0) < 1e-12);
        CHECK(s.x.minCoeff() >= 0.0);
    }
}

TEST_CASE("case 1 direct solution") {
    const auto K = fixture::case1().kernel();
    const auto s = stationary(K, SolveMethod::direct);
    CHECK(s.method == SolveMethod::direct);
    CHECK(s.residual < 1e-10);
    CHECK(std::abs(s.x.sum() - 1.0) < 1e-12);
    CHECK(s.x.minCoeff() >= 0.0);
}

TEST_CASE("R iteration") {
    SUBCASE("zero upward block") {
        const MatrixXd m3 = MatrixXd::Constant(2, 2, 0.25), m5 = MatrixXd::Constant(2, 2, 0.25);
        const auto r = compute_R<double>(m3, MatrixXd::Zero(2, 2), m5);
        CHECK(r.iterations == 1);
        CHECK(r.R.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("case 2: monotone iterates and small residual") {
        const auto K = fixture::case2().kernel();
        MatrixXd prev = MatrixXd::Zero(K.level_block(BlockFamily::m3).rows(), K.level_block(BlockFamily::m3).cols());
        bool monotone = true;
        const auto r = compute_R<double>(K.level_block(BlockFamily::m3), K.level_block(BlockFamily::m4),
                                         K.level_block(BlockFamily::m5), 1e-13, 100000, [&](const MatrixXd& R) {
                                             if ((R - prev).minCoeff() < -1e-15) monotone = false;
                                             prev = R;
                                         });
        CHECK(monotone);
        CHECK(r.residual < 1e-12);
        CHECK(r.R.minCoeff() >= 0.0);
    }
    SUBCASE("non-convergence is reported") {
        const auto K = fixture::case2().kernel();
        CHECK_THROWS_AS(compute_R<double>(K.level_block(BlockFamily::m3), K.level_block(BlockFamily::m4),
                                          K.level_block(BlockFamily::m5), 1e-13, 3),
                        SolverError);
    }
}

namespace {

// Reference arrivals with transmission and computation both faster than
// the arrival rate: the level process is positive recurrent.
oracle::Model stable_load() {
    oracle::Model M = fixture::case1();
    M.s1(0, 0) = 0.1667;
    M.s2(0, 0) = 0.2857;
    return M;
}

}  // namespace

TEST_CASE("boundary system under stable load") {
    const auto K = stable_load().kernel();
    const auto r = compute_R<double>(K.level_block(BlockFamily::m3), K.level_block(BlockFamily::m4),
                                     K.level_block(BlockFamily::m5));
    CHECK(r.residual < 1e-12);
    CHECK(spectral_radius(r.R) < 1.0);
    const auto jac = solve_boundary_jacobi(K, r.R);
    const auto lu = solve_boundary_direct(K, r.R);
    CHECK(jac.residual < 1e-10);
    CHECK((jac.x0 - lu.x0).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((jac.x1 - lu.x1).cwiseAbs().maxCoeff() < 1e-8);

    const auto mg = stationary(K, SolveMethod::matrix_geometric);
    CHECK(mg.method == SolveMethod::matrix_geometric);
    REQUIRE(mg.direct_max_diff.has_value());
    CHECK(*mg.direct_max_diff < 1e-6);
}

TEST_CASE("matrix-geometric pipeline on the reference cases") {
    for (const auto& M : {fixture::case1(), fixture::case2()}) {
        const auto K = M.kernel();
        const MatrixXd P = assemble(K);
        const auto r = compute_R<double>(K.level_block(BlockFamily::m3), K.level_block(BlockFamily::m4),
                                         K.level_block(BlockFamily::m5));
        CHECK(r.residual < 1e-12);
        const auto jac = solve_boundary_jacobi(K, r.R);
        CHECK(jac.iterations > 0);

        const auto mg = stationary(K, SolveMethod::matrix_geometric, &P);
        CHECK(mg.method == SolveMethod::matrix_geometric);
        CHECK(std::abs(mg.x.sum() - 1.0) < 1e-12);
        CHECK(mg.x.minCoeff() >= 0.0);
        REQUIRE(mg.direct_max_diff.has_value());
        REQUIRE(mg.boundary_direct_diff.has_value());
        MESSAGE("matrix-geometric vs direct max component difference " << *mg.direct_max_diff << ", boundary residual "
                                                                       << *mg.jacobi_residual << ", spectral radius "
                                                                       << *mg.r_spectral_radius);
    }
}

TEST_CASE("level expansion with two levels") {
    oracle::Model M = fixture::case1();
    M.N1 = 2;
    const auto K = M.kernel();
    const MatrixXd P = assemble(K);
    const auto d = solve_direct(P);
    const PhaseLayout& L = K.layout();
    const RowVectorXd x0 = d.x.head(L.level_dim(0)), x1 = d.x.segment(L.level_offset(1), L.level_dim(1));
    const RowVectorXd x = expand_levels<double>(K, x0, x1, MatrixXd::Zero(L.level_dim(1), L.level_dim(1)));
    // the top level from x1 M4 (I - M3')^{-1} is exact for any finite chain
    CHECK((x - d.x).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(x.sum() - 1.0) < 1e-12);
}

TEST_CASE("dispatcher falls back below three levels") {
    oracle::Model M = fixture::case1();
    M.N1 = 2;
    const auto s = stationary(M.kernel(), SolveMethod::matrix_geometric);
    CHECK(s.method == SolveMethod::direct);
    CHECK(s.requested == SolveMethod::matrix_geometric);
    CHECK(!s.notices.empty());
}
