#pragma once

#include "mecdelay/kernel.hpp"
#include "mecdelay/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace mecdelay {

enum class SolveMethod { matrix_geometric, direct };

inline const char* method_name(SolveMethod m) { return m == SolveMethod::direct ? "direct" : "mg"; }

template <typename Derived>
typename Derived::Scalar max_abs_entry(const Eigen::MatrixBase<Derived>& m) {
    return m.size() == 0 ? typename Derived::Scalar(0) : m.cwiseAbs().maxCoeff();
}

template <typename Scalar>
struct RMatrix {
    Matrix<Scalar> R;
    Index iterations = 0;
    Scalar residual{};  ///< max |M4 + R M3 + R^2 M5 - R|
};

template <typename Scalar>
Scalar spectral_radius(const Matrix<Scalar>& a) {
    if (a.size() == 0) return Scalar(0);
    Eigen::EigenSolver<Matrix<Scalar>> es(a, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Minimal nonnegative solution of R = M4 + R M3 + R^2 M5 by successive
/// substitution from R = 0. `observer`, when set, sees every iterate.
template <typename Scalar>
RMatrix<Scalar> compute_R(const Matrix<Scalar>& m3, const Matrix<Scalar>& m4, const Matrix<Scalar>& m5,
                          Scalar tol = Scalar(1e-13), Index max_iter = 100000,
                          const std::function<void(const Matrix<Scalar>&)>& observer = {}) {
    if (!(tol > Scalar(0))) throw std::invalid_argument("compute_R: tol must be positive");
    const Index k = m3.rows();
    RMatrix<Scalar> out;
    out.R = Matrix<Scalar>::Zero(k, k);
    Matrix<Scalar> next(k, k);
    for (Index it = 1; it <= max_iter; ++it) {
        next.noalias() = out.R * m5;
        next = m4 + out.R * (m3 + next);
        const Scalar change = max_abs_entry(next - out.R);
        out.R.swap(next);
        out.iterations = it;
        if (observer) observer(out.R);
        if (change < tol) {
            out.residual = max_abs_entry(m4 + out.R * m3 + out.R * out.R * m5 - out.R);
            return out;
        }
    }
    out.residual = max_abs_entry(m4 + out.R * m3 + out.R * out.R * m5 - out.R);
    std::ostringstream os;
    os << "R iteration did not converge in " << max_iter << " iterations (residual " << out.residual << ")";
    throw SolverError(os.str());
}

/// Boundary system (x0, x1) B = (x0, x1) with B = [[M0, M1], [M2, M3 + R M5]].
template <typename Scalar>
Matrix<Scalar> boundary_matrix(const LevelKernel<Scalar>& k, const Matrix<Scalar>& R) {
    const auto& m0 = k.level_block(BlockFamily::m0);
    const auto& m1 = k.level_block(BlockFamily::m1);
    const auto& m2 = k.level_block(BlockFamily::m2);
    const auto& m3 = k.level_block(BlockFamily::m3);
    const auto& m5 = k.level_block(BlockFamily::m5);
    const Index a = m0.rows(), b = m3.rows();
    Matrix<Scalar> B(a + b, a + b);
    B << m0, m1, m2, m3 + R * m5;
    return B;
}

/// Weights w with x e = x0 e + x1 w, from x_i = x1 R^{i-1} (i < N1) and
/// x_{N1} = x_{N1-1} M4 (I - M3')^{-1}.
template <typename Scalar>
Vector<Scalar> level_mass_weights(const LevelKernel<Scalar>& k, const Matrix<Scalar>& R) {
    const int N1 = k.layout().N1();
    const auto& m4 = k.level_block(BlockFamily::m4);
    const auto& m3p = k.level_block(BlockFamily::m3p);
    const Index d = m4.rows();
    const Matrix<Scalar> I = Matrix<Scalar>::Identity(d, d);
    Eigen::FullPivLU<Matrix<Scalar>> lu(I - m3p);
    if (!lu.isInvertible()) throw SolverError("I - M3' is singular");
    const Vector<Scalar> e = Vector<Scalar>::Ones(d);
    Matrix<Scalar> sum = Matrix<Scalar>::Zero(d, d), power = I;
    for (int n = 0; n <= N1 - 2; ++n) {
        sum += power;
        if (n < N1 - 2) power = power * R;
    }
    return sum * e + power * (m4 * lu.solve(e));
}

template <typename Scalar>
struct BoundarySolution {
    RowVector<Scalar> x0, x1;
    Index iterations = 0;
    Scalar residual{};  ///< max |y B - y| of the scaled solution
};

/// Jacobi iteration on (B - I)^T y^T = 0 from the uniform vector, with the
/// splitting (B - I)^T = D + L + U. Iterates are kept at unit sum and the
/// iteration stops when successive iterates differ by less than `tol`; the
/// result is then scaled so that the whole chain (boundary plus geometric
/// levels) has mass one. The boundary residual is reported, not enforced:
/// when R does not satisfy R M5 e = M4 e the system has no exact solution.
template <typename Scalar>
BoundarySolution<Scalar> solve_boundary_jacobi(const LevelKernel<Scalar>& k, const Matrix<Scalar>& R,
                                               Scalar tol = Scalar(1e-12), Index max_iter = 100000) {
    const Matrix<Scalar> B = boundary_matrix(k, R);
    const Index n = B.rows();
    const Matrix<Scalar> A = (B - Matrix<Scalar>::Identity(n, n)).transpose();
    const Vector<Scalar> diag = A.diagonal();
    for (Index i = 0; i < n; ++i)
        if (!(std::abs(diag(i)) > Scalar(0))) throw SolverError("Jacobi: boundary system has a zero diagonal entry");
    Matrix<Scalar> offdiag = A;
    offdiag.diagonal().setZero();

    Vector<Scalar> y = Vector<Scalar>::Constant(n, Scalar(1) / Scalar(n)), next(n);
    Scalar change = std::numeric_limits<Scalar>::infinity();
    Index growth = 0, it = 0;
    while (!(change < tol)) {
        if (++it > max_iter) {
            std::ostringstream os;
            os << "Jacobi did not converge in " << max_iter << " iterations (last change " << change
               << "); use the direct method";
            throw SolverError(os.str());
        }
        next = -(offdiag * y).cwiseQuotient(diag);
        const Scalar s = next.sum();
        if (!(std::abs(s) > Scalar(0)) || !std::isfinite(static_cast<double>(s)))
            throw SolverError("Jacobi iterate collapsed; use the direct method");
        next /= s;
        const Scalar c = max_abs_entry(next - y);
        growth = c > change ? growth + 1 : 0;
        if (growth >= 1000)
            throw SolverError("Jacobi diverges (change grew for 1000 iterations); use the direct method");
        change = c;
        y.swap(next);
    }

    const Index a = k.level_block(BlockFamily::m0).rows();
    const Vector<Scalar> w = level_mass_weights(k, R);
    const Scalar sigma = y.head(a).sum() + y.tail(n - a).dot(w);
    y /= sigma;
    BoundarySolution<Scalar> out;
    out.x0 = y.head(a).transpose();
    out.x1 = y.tail(n - a).transpose();
    out.iterations = it;
    out.residual = max_abs_entry(y.transpose() * B - y.transpose());
    return out;
}

/// Same boundary system by dense LU, with the mass condition x0 e + x1 w = 1
/// in place of one balance equation.
template <typename Scalar>
BoundarySolution<Scalar> solve_boundary_direct(const LevelKernel<Scalar>& k, const Matrix<Scalar>& R) {
    const Matrix<Scalar> B = boundary_matrix(k, R);
    const Index n = B.rows(), a = k.level_block(BlockFamily::m0).rows();
    Matrix<Scalar> A = (B - Matrix<Scalar>::Identity(n, n)).transpose();
    const Vector<Scalar> w = level_mass_weights(k, R);
    A.row(n - 1).head(a).setOnes();
    A.row(n - 1).tail(n - a) = w.transpose();
    Vector<Scalar> rhs = Vector<Scalar>::Zero(n);
    rhs(n - 1) = Scalar(1);
    const Vector<Scalar> y = A.fullPivLu().solve(rhs);
    BoundarySolution<Scalar> out;
    out.x0 = y.head(a).transpose();
    out.x1 = y.tail(n - a).transpose();
    out.residual = max_abs_entry(y.transpose() * B - y.transpose());
    return out;
}

template <typename Scalar>
struct StationaryDistribution {
    RowVector<Scalar> x;
    Scalar residual{};  ///< max |x P - x|
    SolveMethod method = SolveMethod::direct;
    SolveMethod requested = SolveMethod::direct;

    std::optional<Index> r_iterations;
    std::optional<Scalar> r_residual;
    std::optional<Scalar> r_spectral_radius;
    std::optional<Index> jacobi_iterations;
    std::optional<Scalar> jacobi_residual;
    std::optional<Scalar> boundary_direct_diff;  ///< Jacobi vs LU on the boundary system
    std::optional<Scalar> direct_max_diff;       ///< max component difference to the direct solve
    std::vector<std::string> notices;
};

/// x_i = x_{i-1} R for 2 <= i < N1, x_{N1} = x_{N1-1} M4 (I - M3')^{-1}.
template <typename Scalar>
RowVector<Scalar> expand_levels(const LevelKernel<Scalar>& k, const RowVector<Scalar>& x0,
                                const RowVector<Scalar>& x1, const Matrix<Scalar>& R) {
    const PhaseLayout& L = k.layout();
    const int N1 = L.N1();
    if (N1 < 2) throw std::invalid_argument("expand_levels: needs N1 >= 2");
    const auto& m4 = k.level_block(BlockFamily::m4);
    const auto& m3p = k.level_block(BlockFamily::m3p);
    const Index d = m4.rows();
    // y (I - M3') = b  <=>  (I - M3')^T y^T = b^T
    Eigen::FullPivLU<Matrix<Scalar>> lu((Matrix<Scalar>::Identity(d, d) - m3p).transpose());
    if (!lu.isInvertible()) throw SolverError("I - M3' is singular");

    RowVector<Scalar> x(L.total());
    x.head(x0.size()) = x0;
    RowVector<Scalar> level = x1;
    for (int i = 1; i < N1; ++i) {
        if (i > 1) level = level * R;
        x.segment(L.level_offset(i), d) = level;
    }
    const RowVector<Scalar> rhs = level * m4;
    x.segment(L.level_offset(N1), d) = lu.solve(rhs.transpose()).transpose();
    return x / x.sum();
}

namespace detail {

template <typename Scalar>
void finish_distribution(RowVector<Scalar>& x, const char* who) {
    for (Index i = 0; i < x.size(); ++i) {
        if (x(i) < Scalar(0)) {
            if (x(i) < Scalar(-1e-12)) {
                std::ostringstream os;
                os << who << ": component " << i << " is " << x(i);
                throw SolverError(os.str());
            }
            x(i) = Scalar(0);
        }
    }
    x /= x.sum();
}

}  // namespace detail

/// Stationary vector of a stochastic matrix: x (P - I) = 0 with the last
/// equation replaced by x e = 1, by dense LU.
template <typename Scalar>
StationaryDistribution<Scalar> solve_direct(const Matrix<Scalar>& P) {
    const Index n = P.rows();
    if (n == 0 || P.cols() != n) throw std::invalid_argument("solve_direct: P must be square");
    Matrix<Scalar> A = (P - Matrix<Scalar>::Identity(n, n)).transpose();
    A.row(n - 1).setOnes();
    Vector<Scalar> rhs = Vector<Scalar>::Zero(n);
    rhs(n - 1) = Scalar(1);
    Eigen::PartialPivLU<Matrix<Scalar>> lu(A);
    const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
    const Scalar rc = pivots.minCoeff() / pivots.maxCoeff();
    if (!(rc > Scalar(1e-13))) {
        std::ostringstream os;
        os << "stationary system is singular beyond the rank-one deficiency (pivot ratio " << rc << ")";
        throw SolverError(os.str());
    }
    StationaryDistribution<Scalar> out;
    out.x = lu.solve(rhs).transpose();
    detail::finish_distribution(out.x, "direct solve");
    out.residual = max_abs_entry(out.x * P - out.x);
    return out;
}

/// Matrix-geometric solution (R iteration, Jacobi boundary, level expansion).
template <typename Scalar>
StationaryDistribution<Scalar> solve_matrix_geometric(const LevelKernel<Scalar>& k, const Matrix<Scalar>& P) {
    StationaryDistribution<Scalar> out;
    out.method = out.requested = SolveMethod::matrix_geometric;
    const RMatrix<Scalar> r = compute_R<Scalar>(k.level_block(BlockFamily::m3), k.level_block(BlockFamily::m4),
                                                k.level_block(BlockFamily::m5));
    out.r_iterations = r.iterations;
    out.r_residual = r.residual;
    out.r_spectral_radius = spectral_radius(r.R);
    const BoundarySolution<Scalar> jac = solve_boundary_jacobi(k, r.R);
    const BoundarySolution<Scalar> lu = solve_boundary_direct(k, r.R);
    out.jacobi_iterations = jac.iterations;
    out.jacobi_residual = jac.residual;
    out.boundary_direct_diff = std::max(max_abs_entry(jac.x0 - lu.x0), max_abs_entry(jac.x1 - lu.x1));
    out.x = expand_levels(k, jac.x0, jac.x1, r.R);
    detail::finish_distribution(out.x, "matrix-geometric solution");
    out.residual = max_abs_entry(out.x * P - out.x);
    return out;
}

/// Stationary distribution by the requested method. The matrix-geometric
/// route needs N1 >= 3 and falls back to the direct solve (with a notice)
/// when it is not applicable or fails; on success the direct solution is
/// computed too and the largest component difference is recorded.
template <typename Scalar>
StationaryDistribution<Scalar> stationary(const LevelKernel<Scalar>& k, SolveMethod method,
                                          const Matrix<Scalar>* assembled = nullptr) {
    Matrix<Scalar> owned;
    if (!assembled) {
        owned = assemble(k);
        assembled = &owned;
    }
    StationaryDistribution<Scalar> direct = solve_direct(*assembled);
    if (method == SolveMethod::direct) return direct;

    if (k.layout().N1() < 3) {
        direct.requested = SolveMethod::matrix_geometric;
        direct.notices.push_back("matrix-geometric method needs N1 >= 3; used the direct solve");
        return direct;
    }
    try {
        StationaryDistribution<Scalar> mg = solve_matrix_geometric(k, *assembled);
        mg.direct_max_diff = max_abs_entry(mg.x - direct.x);
        return mg;
    } catch (const SolverError& e) {
        direct.requested = SolveMethod::matrix_geometric;
        direct.notices.push_back(std::string("matrix-geometric method failed (") + e.what() +
                                 "); used the direct solve");
        return direct;
    }
}

}  // namespace mecdelay
