#pragma once

#include <Eigen/Core>

namespace glr {

/// In-place 2-D DFT of a dense complex matrix. The forward transform is
/// unscaled and the inverse divides by rows*cols.
void fft2(Eigen::MatrixXcd& m, bool inverse = false);

/// Orthonormal 2-D DFT (both directions scaled by 1/sqrt(rows*cols)).
void fft2_unitary(Eigen::MatrixXcd& m, bool inverse = false);

/// Smallest power of two >= n.
int next_pow2(int n);

} // namespace glr
