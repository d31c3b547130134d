#include "ecomb/propagator.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "ecomb/errors.hpp"

namespace ecomb {

using std::complex;
using MatVec = std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

Eigen::MatrixXcd hermitian_propagator(const Eigen::MatrixXcd& m, double dz) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double herm_defect = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (herm_defect > 1e-12 * scale) {
    throw ConfigError("hermitian_propagator: generator is not Hermitian, defect " +
                      std::to_string(herm_defect));
  }
  const complex<double> minus_i(0.0, -1.0);
  Eigen::MatrixXcd u = (minus_i * dz * m).exp();
  const double unit_defect =
      (u.adjoint() * u - Eigen::MatrixXcd::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
  if (unit_defect > 1e-10) {
    throw ConvergenceError("hermitian_propagator: propagator lost unitarity, defect " +
                           std::to_string(unit_defect));
  }
  return u;
}

namespace {

// One Lanczos pass; returns false if the subspace hit max_dim without meeting
// tol, in which case psi is untouched.
bool lanczos_try(const MatVec& mv, int n, double dz, Eigen::VectorXcd& psi, double tol,
                 int max_dim) {
  const double beta0 = psi.norm();
  if (beta0 == 0.0) return true;

  const int mmax = std::min(max_dim, n);
  Eigen::MatrixXcd V(n, mmax + 1);
  std::vector<double> alpha, beta; // T diagonal and subdiagonal
  V.col(0) = psi / beta0;
  Eigen::VectorXcd w(n);

  for (int j = 0; j < mmax; ++j) {
    mv(V.col(j), w);
    if (j > 0) w -= beta[j - 1] * V.col(j - 1);
    const double a = V.col(j).dot(w).real();
    w -= a * V.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i <= j; ++i) w -= V.col(i).dot(w) * V.col(i);
    }
    alpha.push_back(a);
    const double b = w.norm();

    const int m = j + 1;
    const bool breakdown = b < 1e-14 * beta0;
    if (breakdown || m >= 2 || mmax == 1) {
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) t(i, i) = alpha[static_cast<std::size_t>(i)];
      for (int i = 0; i + 1 < m; ++i) {
        t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
      Eigen::VectorXcd u = Eigen::VectorXcd::Zero(m);
      for (int k = 0; k < m; ++k) {
        const complex<double> ph = std::polar(1.0, -dz * es.eigenvalues()[k]);
        u += ph * es.eigenvectors()(0, k) * es.eigenvectors().col(k);
      }
      const double err = breakdown ? 0.0 : b * std::abs(dz) * std::abs(u[m - 1]);
      if (breakdown || err < tol) {
        psi = V.leftCols(m) * (beta0 * u);
        return true;
      }
    }
    beta.push_back(b);
    V.col(j + 1) = w / b;
  }
  return false;
}

void expm_apply(const MatVec& mv, int n, double dz, Eigen::VectorXcd& psi, double tol,
                int max_dim, int depth = 0) {
  if (lanczos_try(mv, n, dz, psi, tol, max_dim)) return;
  if (depth >= 12) {
    throw ConvergenceError("expm_apply: Krylov subspace failed to converge after halving");
  }
  expm_apply(mv, n, 0.5 * dz, psi, 0.5 * tol, max_dim, depth + 1);
  expm_apply(mv, n, 0.5 * dz, psi, 0.5 * tol, max_dim, depth + 1);
}

} // namespace

void apply_propagator_krylov(const SliceOperator& op, double dz, Eigen::VectorXcd& psi,
                             double tol, int max_dim) {
  const MatVec mv = [&op](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { op.apply(x, y); };
  expm_apply(mv, op.shape.dim(), dz, psi, tol, max_dim);
}

void apply_propagator_strang(const SliceOperator& op, double dz, Eigen::VectorXcd& psi,
                             double tol, int max_dim) {
  const int n = op.shape.dim();
  const double bd = op.b_diag / op.env;
  Eigen::VectorXcd half(n);
  for (int i = 0; i < n; ++i) {
    half[i] = std::polar(1.0, -0.5 * dz * (op.diag[i] + bd));
  }
  psi.array() *= half.array();
  const MatVec mv = [&op](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
    op.apply_offdiag_averaged(x, y);
  };
  expm_apply(mv, n, dz, psi, tol, max_dim);
  psi.array() *= half.array();
}

} // namespace ecomb
