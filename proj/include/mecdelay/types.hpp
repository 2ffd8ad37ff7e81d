#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace mecdelay {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;
using RowVectorXd = RowVector<double>;

// Error taxonomy. The CLI maps ConfigError/ValidationError to exit code 2
// and SolverError to exit code 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model object (D-MAP, D-PH, layout) violates one of its invariants.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A configuration document is unreadable or malformed. `path` names the
/// offending field, e.g. "arrival.D0[1][0]".
class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& what)
        : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// A numerical procedure failed to converge or produced an inconsistent result.
class SolverError : public Error {
public:
    using Error::Error;
};

}  // namespace mecdelay
