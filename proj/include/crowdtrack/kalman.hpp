#pragma once

#include "crowdtrack/geometry.hpp"

#include <Eigen/Core>

#include <optional>

namespace crowdtrack {

using StateVector = Eigen::Matrix<double, 8, 1>;
using StateCovariance = Eigen::Matrix<double, 8, 8>;
using MeasurementVector = Eigen::Matrix<double, 4, 1>;

/// Constant-velocity box state: (center-x, center-y, aspect w/h, height)
/// followed by their per-frame velocities.
struct KalmanState {
    StateVector mean = StateVector::Zero();
    StateCovariance covariance = StateCovariance::Identity();
};

/// Noise standard deviations are these weights times the box height.
struct MotionParams {
    double position_noise_weight = 1.0 / 20.0;
    double velocity_noise_weight = 1.0 / 160.0;

    void validate() const;
};

/// (left, top, width, height) -> (center-x, center-y, aspect, height).
MeasurementVector to_measurement(const Box& box);

class KalmanFilter {
public:
    explicit KalmanFilter(MotionParams params = {});

    const MotionParams& params() const { return params_; }

    KalmanState initiate(const Box& measurement) const;

    /// Advance one frame; adds height-scaled process noise.
    KalmanState predict(const KalmanState& state) const;

    /// Kalman correction with a box measurement. Throws NumericError when the
    /// innovation covariance is not positive definite.
    KalmanState update(const KalmanState& state, const Box& measurement) const;

    /// Measurement-space mean and covariance (including measurement noise).
    std::pair<MeasurementVector, Eigen::Matrix4d> project(const KalmanState& state) const;

private:
    MotionParams params_;
    StateCovariance motion_;
    Eigen::Matrix<double, 4, 8> observation_;
};

/// Box described by the state's position/shape components. Throws InputError
/// when height or aspect is not positive.
Box project_to_box(const KalmanState& state);

/// Non-throwing variant of project_to_box.
std::optional<Box> try_project_to_box(const KalmanState& state);

} // namespace crowdtrack
