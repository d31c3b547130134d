#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdlib>
#include <vector>

#include "ecomb/comb.hpp"
#include "ecomb/lab_config.hpp"

namespace ecomb {

// Form of the kinematic dephasing on the diagonal of the slice generator.
// detuning_sum uses l1 delta1 + l2 delta2, which vanishes on the resonant
// ladder l2 = -l1 at exact matching. index_difference uses (l1 - l2) delta1
// and is kept selectable for cross-checks against the grid solver; it
// dephases the resonant ladder and is not the default.
enum class MismatchForm { detuning_sum, index_difference };

enum class PropagatorBackend { dense_pade, krylov, strang_split };

struct LatticeShape {
  int ell_max = 0;
  int side() const { return 2 * ell_max + 1; }
  int dim() const { return side() * side(); }
  int idx(int l1, int l2) const { return (l1 + ell_max) * side() + (l2 + ell_max); }
  bool contains(int l1, int l2) const {
    return std::abs(l1) <= ell_max && std::abs(l2) <= ell_max;
  }
};

// Two-index photon-exchange amplitudes alpha_{l1 l2}; index l_j counts
// quanta emitted into beam j. Stored dense, row-major in l1.
struct AmplitudeLattice {
  LatticeShape shape;
  Eigen::VectorXcd amp;
  double position_over_z0 = 0.0;

  static AmplitudeLattice initial(int ell_max);
  std::complex<double> at(int l1, int l2) const { return amp[shape.idx(l1, l2)]; }
  double norm_sq() const { return amp.squaredNorm(); }
};

// Hermitian generator of one envelope slice, M = D + C / (1 + l_n^2):
// D carries detuning and recoil phases, C the two-beam couplings. The state
// advances by exp(-i M dz) per slice.
struct SliceOperator {
  LatticeShape shape;
  Eigen::VectorXd diag;                // kinematic diagonal D
  std::complex<double> b12, a12, a11, a22; // couplings excluding envelope
  double b_diag = 0.0;                 // 2 Re(B11 + B22)
  double env = 1.0;                    // 1 + l_n^2
  double position = 0.0;               // slice center l_n
  double width = 0.0;                  // dz

  void apply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const;          // y = M x
  void apply_offdiag(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const;  // y = (C_offdiag/env) x
  // Coupling averaged over the slice in the interaction picture of D: each
  // element picks up sinc((D_i - D_j) dz / 2). Without this a slice that
  // advances a fast diagonal phase by nearly 2 pi k makes the corresponding
  // coupling look resonant to the marching scheme and weight builds up
  // coherently where the continuum problem has none.
  void apply_offdiag_averaged(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const;
  Eigen::MatrixXcd dense() const;
  // Rough bound on the off-diagonal coupling norm, used for step control.
  double coupling_bound() const;
};

SliceOperator build_slice_matrix(const DimensionlessProblem& p, int slice_index,
                                 MismatchForm form = MismatchForm::detuning_sum);

struct EvolveOptions {
  // strang_split handles the stiff detuning diagonal with exact phases and
  // needs only a short Lanczos recurrence for the weak coupling part; the
  // other two backends exponentiate the full slice generator and serve as
  // cross-checks.
  PropagatorBackend backend = PropagatorBackend::strang_split;
  MismatchForm mismatch = MismatchForm::detuning_sum;
  double krylov_tol = 1e-12;
  int krylov_max_dim = 96;
  int record_stride = 0;        // 0 records nothing between start and finish
  bool record_full_lattice = false;
  double norm_abort = 1e-6;     // norm drift that aborts the run
  double boundary_flag = 1e-8;  // boundary amplitude that flags truncation
};

struct TrajectoryRecord {
  double position_over_z0 = 0.0;
  SidebandSpectrum resonant;
  double resonant_weight = 0.0;
  double nonresonant_weight = 0.0;
};

struct EvolveResult {
  AmplitudeLattice final_state;
  std::vector<TrajectoryRecord> trajectory;
  std::vector<AmplitudeLattice> lattices; // filled only when record_full_lattice
  double norm_drift = 0.0;
  double boundary_occupation = 0.0; // max |amp| seen on the truncation boundary
  bool truncation_ok = true;
};

// March the initial state alpha_{l1 l2} = delta_{l1 0} delta_{l2 0} through
// all slices of the interaction region.
EvolveResult evolve(const DimensionlessProblem& p, const EvolveOptions& opts = {});

struct ResonantExtraction {
  SidebandSpectrum spectrum; // normalized amplitudes alpha_{l, -l}
  double resonant_weight = 0.0;
  double nonresonant_weight = 0.0;
};

ResonantExtraction extract_resonant(const AmplitudeLattice& lat);

} // namespace ecomb
