#pragma once

#include <Eigen/Dense>

#include "ecomb/lattice.hpp"

namespace ecomb {

// exp(-i dz M) for Hermitian M by Pade approximation with scaling and
// squaring. Verifies hermiticity of the input and unitarity of the result.
Eigen::MatrixXcd hermitian_propagator(const Eigen::MatrixXcd& m, double dz);

// In-place psi <- exp(-i dz M) psi through a Lanczos subspace with full
// reorthogonalization; falls back to recursive halving of dz when the
// subspace does not converge.
void apply_propagator_krylov(const SliceOperator& op, double dz, Eigen::VectorXcd& psi,
                             double tol = 1e-12, int max_dim = 96);

// Second-order split: exact diagonal phases around a Lanczos exponential of
// the off-diagonal coupling block.
void apply_propagator_strang(const SliceOperator& op, double dz, Eigen::VectorXcd& psi,
                             double tol = 1e-12, int max_dim = 96);

} // namespace ecomb
