#pragma once

#include <Eigen/Dense>

namespace k3glue {

using Vector3 = Eigen::Vector3d;
using Vector4 = Eigen::Vector4d;
using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix3 = Eigen::Matrix3d;
using Matrix4 = Eigen::Matrix4d;
using Matrix6 = Eigen::Matrix<double, 6, 6>;
// Rows of a Coefficients36 are the three 2-forms of a triple.
using Coefficients36 = Eigen::Matrix<double, 3, 6>;

// Cyclic successor pairs: for i in {0,1,2}, (i, cyc1(i), cyc2(i)) is an even
// permutation of (0,1,2).
inline constexpr int cyc1(int i) { return (i + 1) % 3; }
inline constexpr int cyc2(int i) { return (i + 2) % 3; }

inline constexpr double kPi = 3.14159265358979323846;

} // namespace k3glue
