#include "ecomb/lattice.hpp"

#include <array>
#include <cmath>
#include <string>

#include "ecomb/errors.hpp"
#include "ecomb/propagator.hpp"

namespace ecomb {

using std::complex;

AmplitudeLattice AmplitudeLattice::initial(int ell_max) {
  if (ell_max < 1) throw ConfigError("AmplitudeLattice: ell_max must be >= 1");
  AmplitudeLattice lat;
  lat.shape.ell_max = ell_max;
  lat.amp = Eigen::VectorXcd::Zero(lat.shape.dim());
  lat.amp[lat.shape.idx(0, 0)] = 1.0;
  return lat;
}

namespace {

struct Stencil {
  int dl1, dl2;
  complex<double> coef;
};

std::array<Stencil, 8> offdiag_stencil(const SliceOperator& op) {
  return {{{+1, -1, 2.0 * op.b12},
           {-1, +1, 2.0 * std::conj(op.b12)},
           {+1, +1, -op.a12},
           {-1, -1, -std::conj(op.a12)},
           {+2, 0, -op.a11},
           {-2, 0, -std::conj(op.a11)},
           {0, +2, -op.a22},
           {0, -2, -std::conj(op.a22)}}};
}

} // namespace

void SliceOperator::apply_offdiag(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const {
  const int L = shape.ell_max;
  const int side = shape.side();
  y.setZero(shape.dim());
  const double inv_env = 1.0 / env;
  for (const Stencil& s : offdiag_stencil(*this)) {
    const complex<double> c = s.coef * inv_env;
    const int l1_lo = std::max(-L, -L - s.dl1);
    const int l1_hi = std::min(L, L - s.dl1);
    const int l2_lo = std::max(-L, -L - s.dl2);
    const int l2_hi = std::min(L, L - s.dl2);
    for (int l1 = l1_lo; l1 <= l1_hi; ++l1) {
      const int dst = (l1 + L) * side + l2_lo + L;
      const int src = (l1 + s.dl1 + L) * side + l2_lo + s.dl2 + L;
      const int count = l2_hi - l2_lo + 1;
      y.segment(dst, count) += c * x.segment(src, count);
    }
  }
}

void SliceOperator::apply_offdiag_averaged(const Eigen::VectorXcd& x,
                                           Eigen::VectorXcd& y) const {
  const int L = shape.ell_max;
  const int side = shape.side();
  y.setZero(shape.dim());
  const double inv_env = 1.0 / env;
  const double half_width = 0.5 * width;
  const auto sinc = [](double t) { return std::abs(t) < 1e-8 ? 1.0 : std::sin(t) / t; };
  for (const Stencil& s : offdiag_stencil(*this)) {
    const complex<double> c = s.coef * inv_env;
    const int l1_lo = std::max(-L, -L - s.dl1);
    const int l1_hi = std::min(L, L - s.dl1);
    const int l2_lo = std::max(-L, -L - s.dl2);
    const int l2_hi = std::min(L, L - s.dl2);
    for (int l1 = l1_lo; l1 <= l1_hi; ++l1) {
      int dst = (l1 + L) * side + l2_lo + L;
      int src = (l1 + s.dl1 + L) * side + l2_lo + s.dl2 + L;
      for (int l2 = l2_lo; l2 <= l2_hi; ++l2, ++dst, ++src) {
        y[dst] += c * sinc((diag[dst] - diag[src]) * half_width) * x[src];
      }
    }
  }
}

void SliceOperator::apply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const {
  apply_offdiag(x, y);
  const double bd = b_diag / env;
  y.array() += (diag.array() + bd) * x.array();
}

Eigen::MatrixXcd SliceOperator::dense() const {
  const int n = shape.dim();
  const int L = shape.ell_max;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  const double bd = b_diag / env;
  for (int i = 0; i < n; ++i) m(i, i) = diag[i] + bd;
  for (const Stencil& s : offdiag_stencil(*this)) {
    const complex<double> c = s.coef / env;
    for (int l1 = -L; l1 <= L; ++l1) {
      for (int l2 = -L; l2 <= L; ++l2) {
        if (!shape.contains(l1 + s.dl1, l2 + s.dl2)) continue;
        m(shape.idx(l1, l2), shape.idx(l1 + s.dl1, l2 + s.dl2)) += c;
      }
    }
  }
  return m;
}

double SliceOperator::coupling_bound() const {
  double sum = 0.0;
  for (const Stencil& s : offdiag_stencil(*this)) sum += std::abs(s.coef);
  return sum / env;
}

SliceOperator build_slice_matrix(const DimensionlessProblem& p, int slice_index,
                                 MismatchForm form) {
  if (p.ell_max < 1) throw ConfigError("build_slice_matrix: problem has no truncation order");
  if (slice_index < 0 || slice_index >= p.slice_count)
    throw ConfigError("build_slice_matrix: slice index out of range");

  SliceOperator op;
  op.shape.ell_max = p.ell_max;
  op.position = p.slice_center(slice_index);
  op.width = p.slice_width();
  op.env = 1.0 + op.position * op.position;
  op.b12 = p.B12;
  op.a12 = p.A12;
  op.a11 = p.A11;
  op.a22 = p.A22;
  op.b_diag = 2.0 * (p.B11.real() + p.B22.real());

  const double rc = p.recoil_coeff();
  const double r = p.omega_ratio;
  op.diag.resize(op.shape.dim());
  for (int l1 = -p.ell_max; l1 <= p.ell_max; ++l1) {
    for (int l2 = -p.ell_max; l2 <= p.ell_max; ++l2) {
      const double mismatch = (form == MismatchForm::detuning_sum)
                                  ? l1 * p.delta1 + l2 * p.delta2
                                  : (l1 - l2) * p.delta1;
      const double q = l1 - r * l2;
      op.diag[op.shape.idx(l1, l2)] = mismatch + rc * q * q;
    }
  }
  return op;
}

namespace {

double boundary_amplitude(const AmplitudeLattice& lat) {
  const int L = lat.shape.ell_max;
  double mx = 0.0;
  for (int l = -L; l <= L; ++l) {
    mx = std::max(mx, std::abs(lat.at(L, l)));
    mx = std::max(mx, std::abs(lat.at(-L, l)));
    mx = std::max(mx, std::abs(lat.at(l, L)));
    mx = std::max(mx, std::abs(lat.at(l, -L)));
  }
  return mx;
}

} // namespace

ResonantExtraction extract_resonant(const AmplitudeLattice& lat) {
  const int L = lat.shape.ell_max;
  ResonantExtraction out;
  out.spectrum = SidebandSpectrum::zeros(L);
  out.spectrum.provenance = "lattice";
  double res = 0.0;
  for (int l = -L; l <= L; ++l) {
    const complex<double> a = lat.at(l, -l);
    out.spectrum.at(l) = a;
    res += std::norm(a);
  }
  out.resonant_weight = res;
  out.nonresonant_weight = std::max(0.0, lat.norm_sq() - res);
  if (res <= 0.0) throw ConvergenceError("extract_resonant: no weight on the resonant ladder");
  const double scale = 1.0 / std::sqrt(res);
  for (auto& a : out.spectrum.amp) a *= scale;
  out.spectrum.raw_weight = res;
  return out;
}

EvolveResult evolve(const DimensionlessProblem& p, const EvolveOptions& opts) {
  if (p.slice_count < 1) throw ConfigError("evolve: slice_count must be >= 1");
  if (p.slice_width() > 0.1 + 1e-12) {
    throw ConfigError("evolve: slice width " + std::to_string(p.slice_width()) +
                      " z0 exceeds z0/10; raise slice_count for this span");
  }

  EvolveResult res;
  AmplitudeLattice state = AmplitudeLattice::initial(p.ell_max);
  state.position_over_z0 = -0.5 * p.span_over_z0;
  const double dz = p.slice_width();

  Eigen::MatrixXcd u_dense; // reused between slices for the dense backend

  for (int n = 0; n < p.slice_count; ++n) {
    const SliceOperator op = build_slice_matrix(p, n, opts.mismatch);
    switch (opts.backend) {
      case PropagatorBackend::dense_pade:
        u_dense = hermitian_propagator(op.dense(), dz);
        state.amp = u_dense * state.amp;
        break;
      case PropagatorBackend::krylov:
        apply_propagator_krylov(op, dz, state.amp, opts.krylov_tol, opts.krylov_max_dim);
        break;
      case PropagatorBackend::strang_split:
        apply_propagator_strang(op, dz, state.amp, opts.krylov_tol, opts.krylov_max_dim);
        break;
    }
    state.position_over_z0 = op.position + 0.5 * dz;

    const double drift = std::abs(state.norm_sq() - 1.0);
    res.norm_drift = std::max(res.norm_drift, drift);
    if (drift > opts.norm_abort) {
      throw ConvergenceError("evolve: norm drift " + std::to_string(drift) + " at slice " +
                             std::to_string(n) + " of " + std::to_string(p.slice_count));
    }
    res.boundary_occupation = std::max(res.boundary_occupation, boundary_amplitude(state));

    const bool last = (n == p.slice_count - 1);
    if ((opts.record_stride > 0 && (n + 1) % opts.record_stride == 0) || last) {
      const ResonantExtraction ex = extract_resonant(state);
      res.trajectory.push_back({state.position_over_z0, ex.spectrum, ex.resonant_weight,
                                ex.nonresonant_weight});
      if (opts.record_full_lattice) res.lattices.push_back(state);
    }
  }

  res.truncation_ok = res.boundary_occupation < opts.boundary_flag;
  res.final_state = std::move(state);
  return res;
}

} // namespace ecomb
