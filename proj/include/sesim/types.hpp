#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace sesim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Base class for every contract violation raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// vee() received a matrix that is not skew-symmetric within tolerance.
struct NotSkew : Error {
  using Error::Error;
};

/// A matrix expected to be a rotation fails the orthonormality check.
struct NotOrthonormal : Error {
  using Error::Error;
};

/// Logarithm requested at (or numerically indistinguishable from) a half-turn,
/// where the principal axis is not unique.
struct AntipodalRotation : Error {
  using Error::Error;
};

/// Rotation lies outside the region where the requested vector coordinates
/// are a diffeomorphism.
struct OutsideInjectivityRegion : Error {
  using Error::Error;
};

/// Vector lies outside the image of the requested coordinate map.
struct OutsideImage : Error {
  using Error::Error;
};

/// A kinematic Jacobian is too ill-conditioned to use (or to invert).
struct NearSingular : Error {
  using Error::Error;
};

/// Operation requires a strongly connected graph.
struct NotStronglyConnected : Error {
  using Error::Error;
};

/// Query time lies outside the schedule horizon.
struct OutOfHorizon : Error {
  using Error::Error;
};

/// A run configuration failed validation; the message names the offending key.
struct ConfigInvalid : Error {
  using Error::Error;
};

/// Logarithmic fit requested on a series with non-positive entries.
struct NonPositiveValue : Error {
  using Error::Error;
};

/// File could not be read or written.
struct IoError : Error {
  using Error::Error;
};

}  // namespace sesim
