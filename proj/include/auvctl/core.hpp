#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace auvctl {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Quat = Eigen::Quaterniond;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kGravity = 9.81;
inline constexpr double kMaxRpm = 1525.0;
inline constexpr double kMaxSpeed = 2.3;
inline constexpr double kMaxYawRate = 0.26;
inline constexpr double kControlDt = 0.05;

/// Base of every error raised by the library. `kind()` is a stable tag used by
/// the CLI to pick exit codes and by tests to assert on the failure class.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define AUVCTL_ERROR(Name)                                                  \
    class Name : public Error {                                             \
    public:                                                                 \
        explicit Name(const std::string& what) : Error(#Name, what) {}      \
    }

AUVCTL_ERROR(InvalidParams);
AUVCTL_ERROR(NonFiniteState);
AUVCTL_ERROR(NonUnitQuaternion);
AUVCTL_ERROR(DomainError);
AUVCTL_ERROR(ConvergenceError);
AUVCTL_ERROR(WidthMismatch);
AUVCTL_ERROR(LengthMismatch);
AUVCTL_ERROR(NonFiniteLoss);
AUVCTL_ERROR(PlacementError);
AUVCTL_ERROR(TraceTooShort);
AUVCTL_ERROR(MalformedResponse);
AUVCTL_ERROR(LlmClientError);
AUVCTL_ERROR(ConfigError);
AUVCTL_ERROR(IoError);

#undef AUVCTL_ERROR

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
    double w = std::remainder(a, 2.0 * kPi);
    if (w <= -kPi) w += 2.0 * kPi;
    return w;
}

inline bool all_finite(const auto& m) { return m.allFinite(); }

/// SplitMix64 step; used to derive independent seeds from one run seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace auvctl
