#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bmlab {

// Small fixed-capacity vectors: n <= 3 in space, n+1 <= 4 in (t,x).
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 6, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 6, 6>;

using ScalarField = std::function<double(const Vec&)>;
using VecField = std::function<Vec(const Vec&)>;
using MatField = std::function<Mat(const Vec&)>;

enum class ErrorCode {
  EmptyBody,
  GridMismatch,
  OutOfRange,
  BadNesting,
  SingularOrigin,
  NonFiniteIntegrand,
  NotNonnegative,
  TooFewPoints,
  NotEven,
  IncompatibleData,
  NotPositive,
  MissingKinematics,
  LevelsetMismatch,
  NotStrictlyLogconcave,
  NotConcave,
  UnsupportedBeta,
  HypothesisFail,
  BadConfig,
  Io,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::EmptyBody: return "EMPTY_BODY";
    case ErrorCode::GridMismatch: return "GRID_MISMATCH";
    case ErrorCode::OutOfRange: return "OUT_OF_RANGE";
    case ErrorCode::BadNesting: return "BAD_NESTING";
    case ErrorCode::SingularOrigin: return "SINGULAR_ORIGIN";
    case ErrorCode::NonFiniteIntegrand: return "NON_FINITE_INTEGRAND";
    case ErrorCode::NotNonnegative: return "NOT_NONNEGATIVE";
    case ErrorCode::TooFewPoints: return "TOO_FEW_POINTS";
    case ErrorCode::NotEven: return "NOT_EVEN";
    case ErrorCode::IncompatibleData: return "INCOMPATIBLE_DATA";
    case ErrorCode::NotPositive: return "NOT_POSITIVE";
    case ErrorCode::MissingKinematics: return "MISSING_KINEMATICS";
    case ErrorCode::LevelsetMismatch: return "LEVELSET_MISMATCH";
    case ErrorCode::NotStrictlyLogconcave: return "NOT_STRICTLY_LOGCONCAVE";
    case ErrorCode::NotConcave: return "NOT_CONCAVE";
    case ErrorCode::UnsupportedBeta: return "UNSUPPORTED_BETA";
    case ErrorCode::HypothesisFail: return "HYPOTHESIS_FAIL";
    case ErrorCode::BadConfig: return "BAD_CONFIG";
    case ErrorCode::Io: return "IO_ERROR";
  }
  return "UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline constexpr double pi = std::numbers::pi;
inline constexpr double inf = std::numeric_limits<double>::infinity();

// |S^{n-1}|, with |S^0| = 2 (counting measure on {-1,+1}).
inline double sphere_area(int n) {
  return 2.0 * std::pow(pi, 0.5 * n) / std::tgamma(0.5 * n);
}

inline double ball_volume(int k) {
  return std::pow(pi, 0.5 * k) / std::tgamma(0.5 * k + 1.0);
}

inline Vec unit(int n, int i) {
  Vec e = Vec::Zero(n);
  e(i) = 1.0;
  return e;
}

inline Vec make_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

inline double sqr(double x) { return x * x; }

}  // namespace bmlab
