#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace homconj {

/// Points of F live in a small fixed-capacity vector; no heap traffic on the
/// hot evaluation paths.
inline constexpr int kMaxDim = 4;

using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

enum class Norm { euclidean, sup };

inline double norm(const Point& x, Norm kind) {
    return kind == Norm::euclidean ? x.norm() : x.lpNorm<Eigen::Infinity>();
}

inline Point make_point(std::initializer_list<double> coords) {
    Point p(static_cast<Eigen::Index>(coords.size()));
    Eigen::Index i = 0;
    for (double c : coords) p(i++) = c;
    return p;
}

inline Point scalar_point(double x) {
    Point p(1);
    p(0) = x;
    return p;
}

std::string to_string(const Point& p);

// Error taxonomy. Everything derives from Error so callers can catch broadly.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Operands live on different domains.
struct DomainMismatch : Error {
    using Error::Error;
};

/// A map returned a non-finite value at a sample.
struct EvaluationError : Error {
    using Error::Error;
};

/// An operation needed a finite estimate but the window-doubling rule said otherwise.
struct DivergentEstimate : Error {
    using Error::Error;
};

/// Documented precondition of an operation does not hold.
struct PreconditionError : Error {
    using Error::Error;
};

} // namespace homconj
