#include "crowdtrack/kalman.hpp"

#include "crowdtrack/error.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace crowdtrack {

void MotionParams::validate() const
{
    if (!(position_noise_weight > 0.0) || !(velocity_noise_weight > 0.0)) {
        throw InputError("MotionParams: noise weights must be > 0");
    }
}

MeasurementVector to_measurement(const Box& box)
{
    MeasurementVector z;
    z << box.center_x(), box.center_y(), box.width / box.height, box.height;
    return z;
}

KalmanFilter::KalmanFilter(MotionParams params)
    : params_(params)
{
    params_.validate();
    motion_ = StateCovariance::Identity();
    for (int i = 0; i < 4; ++i) {
        motion_(i, i + 4) = 1.0;
    }
    observation_ = Eigen::Matrix<double, 4, 8>::Zero();
    observation_.leftCols<4>() = Eigen::Matrix4d::Identity();
}

KalmanState KalmanFilter::initiate(const Box& measurement) const
{
    const double h = measurement.height;
    const double wp = params_.position_noise_weight;
    const double wv = params_.velocity_noise_weight;

    KalmanState state;
    state.mean.head<4>() = to_measurement(measurement);
    state.mean.tail<4>().setZero();

    StateVector std_dev;
    std_dev << 2.0 * wp * h, 2.0 * wp * h, 1e-2, 2.0 * wp * h,
        10.0 * wv * h, 10.0 * wv * h, 1e-5, 10.0 * wv * h;
    state.covariance = std_dev.array().square().matrix().asDiagonal();
    return state;
}

KalmanState KalmanFilter::predict(const KalmanState& state) const
{
    const double h = state.mean(3);
    const double wp = params_.position_noise_weight;
    const double wv = params_.velocity_noise_weight;

    StateVector std_dev;
    std_dev << wp * h, wp * h, 1e-2, wp * h, wv * h, wv * h, 1e-5, wv * h;
    const StateCovariance process = std_dev.array().square().matrix().asDiagonal();

    KalmanState out;
    out.mean = motion_ * state.mean;
    out.covariance = motion_ * state.covariance * motion_.transpose() + process;
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
    return out;
}

std::pair<MeasurementVector, Eigen::Matrix4d> KalmanFilter::project(const KalmanState& state) const
{
    const double h = state.mean(3);
    const double wp = params_.position_noise_weight;
    Eigen::Vector4d std_dev(wp * h, wp * h, 1e-1, wp * h);
    const Eigen::Matrix4d noise = std_dev.array().square().matrix().asDiagonal();

    MeasurementVector mean = observation_ * state.mean;
    Eigen::Matrix4d cov = observation_ * state.covariance * observation_.transpose() + noise;
    return {mean, cov};
}

KalmanState KalmanFilter::update(const KalmanState& state, const Box& measurement) const
{
    const auto [projected_mean, projected_cov] = project(state);
    const Eigen::LLT<Eigen::Matrix4d> chol(projected_cov);
    if (chol.info() != Eigen::Success) {
        throw NumericError("KalmanFilter::update: innovation covariance is not positive definite "
                           "(degenerate noise configuration)");
    }
    // K = P H^T S^-1, solved as S K^T = H P.
    const Eigen::Matrix<double, 4, 8> cross = observation_ * state.covariance;
    const Eigen::Matrix<double, 8, 4> gain = chol.solve(cross).transpose();
    const MeasurementVector innovation = to_measurement(measurement) - projected_mean;

    KalmanState out;
    out.mean = state.mean + gain * innovation;
    out.covariance = state.covariance - gain * projected_cov * gain.transpose();
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
    return out;
}

std::optional<Box> try_project_to_box(const KalmanState& state)
{
    const double aspect = state.mean(2);
    const double h = state.mean(3);
    if (!(h > 0.0) || !(aspect > 0.0) || !state.mean.head<4>().allFinite()) {
        return std::nullopt;
    }
    const double w = aspect * h;
    return Box{state.mean(0) - 0.5 * w, state.mean(1) - 0.5 * h, w, h};
}

Box project_to_box(const KalmanState& state)
{
    auto box = try_project_to_box(state);
    if (!box) {
        throw InputError("project_to_box: state has non-positive height or aspect");
    }
    return *box;
}

} // namespace crowdtrack
