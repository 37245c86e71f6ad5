#pragma once

#include "collar/types.hpp"

namespace collar {

/// Eigen-decomposition of a symmetric 3x3 matrix.
struct SymmetricEigen3 {
    Vec3 values;   // ascending
    Mat3 vectors;  // column k pairs with values[k]
};

/// Cyclic Jacobi rotations to convergence. Only the upper triangle is read.
/// Ties in the eigenvalues keep the Jacobi column order, and each eigenvector
/// is signed so its largest-magnitude component is positive, which makes the
/// output a deterministic function of the input.
SymmetricEigen3 eigen_symmetric(const Mat3& m);

}  // namespace collar
