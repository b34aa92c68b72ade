#pragma once
// Single-qubit state tomography in the time-bin bases: Stokes parameters
// from counts, density-matrix reconstruction, physicality repair, and
// fidelity against an expected state.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

#include "teleportsim/core.hpp"

namespace tsim {

// Counts in the six projection settings: time basis (e, l), phase basis
// (+, -), and circular basis (+i, -i).
struct TomographyCounts {
  std::int64_t n_e = 0;
  std::int64_t n_l = 0;
  std::int64_t n_plus = 0;
  std::int64_t n_minus = 0;
  std::int64_t n_plus_i = 0;
  std::int64_t n_minus_i = 0;
};

inline void validate(const TomographyCounts& c) {
  if (c.n_e < 0 || c.n_l < 0 || c.n_plus < 0 || c.n_minus < 0 ||
      c.n_plus_i < 0 || c.n_minus_i < 0) {
    throw InputError("tomography counts must be >= 0");
  }
}

struct DensityMatrix {
  // Row-major 2x2, basis {|e>, |l>}.
  std::array<std::array<std::complex<double>, 2>, 2> m{};
};

// (S0, S1, S2, S3) = (total in the time basis, +/- difference, +i/-i
// difference, e/l difference). Raw integer differences; basis totals are
// not normalized to each other here.
inline std::array<std::int64_t, 4> stokes_from_counts(const TomographyCounts& c) {
  validate(c);
  return {c.n_e + c.n_l, c.n_plus - c.n_minus, c.n_plus_i - c.n_minus_i,
          c.n_e - c.n_l};
}

inline DensityMatrix density_from_bloch(double rx, double ry, double rz) {
  DensityMatrix rho;
  rho.m[0][0] = {0.5 * (1.0 + rz), 0.0};
  rho.m[1][1] = {0.5 * (1.0 - rz), 0.0};
  rho.m[0][1] = {0.5 * rx, -0.5 * ry};
  rho.m[1][0] = {0.5 * rx, 0.5 * ry};
  return rho;
}

inline std::array<double, 3> bloch_vector(const DensityMatrix& rho) {
  return {2.0 * rho.m[1][0].real(), 2.0 * rho.m[1][0].imag(),
          rho.m[0][0].real() - rho.m[1][1].real()};
}

// rho = (I + sum_k (S_k/S_0) sigma_k) / 2.
inline DensityMatrix density_from_stokes(double s0, double s1, double s2,
                                         double s3) {
  if (!(s0 > 0.0)) throw InputError("S0 must be > 0");
  return density_from_bloch(s1 / s0, s2 / s0, s3 / s0);
}

inline void validate(const DensityMatrix& rho) {
  constexpr double kTol = 1e-9;
  const double trace = rho.m[0][0].real() + rho.m[1][1].real();
  if (std::abs(trace - 1.0) > kTol) {
    throw InputError("density matrix trace must be 1");
  }
  if (std::abs(rho.m[0][0].imag()) > kTol || std::abs(rho.m[1][1].imag()) > kTol ||
      std::abs(rho.m[0][1] - std::conj(rho.m[1][0])) > kTol) {
    throw InputError("density matrix must be Hermitian");
  }
}

inline std::array<double, 2> eigenvalues(const DensityMatrix& rho) {
  const std::array<double, 3> r = bloch_vector(rho);
  const double len = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
  return {0.5 * (1.0 - len), 0.5 * (1.0 + len)};
}

// Shrinks the Bloch vector onto the unit sphere when reconstruction noise
// pushed it outside; physical matrices are returned unchanged.
inline DensityMatrix physicality_repair(const DensityMatrix& rho) {
  validate(rho);
  const std::array<double, 3> r = bloch_vector(rho);
  const double len = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
  if (len <= 1.0) return rho;
  return density_from_bloch(r[0] / len, r[1] / len, r[2] / len);
}

// <psi| rho |psi> for a pure target state.
inline double state_fidelity(const DensityMatrix& rho, const TimeBinQubit& psi) {
  validate(rho);
  if (eigenvalues(rho)[0] < -1e-9) {
    throw NumericalError("state_fidelity: density matrix is nonphysical");
  }
  const TimeBinQubit q = canonical(psi);
  const std::complex<double> a(q.amp_early, 0.0);
  const std::complex<double> b = std::polar(q.amp_late, q.phase);
  const std::complex<double> f = std::conj(a) * rho.m[0][0] * a +
                                 std::conj(a) * rho.m[0][1] * b +
                                 std::conj(b) * rho.m[1][0] * a +
                                 std::conj(b) * rho.m[1][1] * b;
  return f.real();
}

struct TomographyResult {
  DensityMatrix rho;
  double fidelity = 0.0;
};

// Full reconstruction: rescales each basis pair to the mean pair total so
// unequal integration across settings cancels, builds the density matrix,
// repairs physicality, and scores against the expected post-teleportation
// state for the given input.
inline TomographyResult tomography_pipeline(const TomographyCounts& c,
                                            const TimeBinQubit& input_state) {
  validate(c);
  const double tz = static_cast<double>(c.n_e + c.n_l);
  const double tx = static_cast<double>(c.n_plus + c.n_minus);
  const double ty = static_cast<double>(c.n_plus_i + c.n_minus_i);
  if (!(tz > 0.0) || !(tx > 0.0) || !(ty > 0.0)) {
    throw InputError("every basis pair needs at least one count");
  }
  const double mean_total = (tz + tx + ty) / 3.0;
  const double s1 = static_cast<double>(c.n_plus - c.n_minus) * mean_total / tx;
  const double s2 =
      static_cast<double>(c.n_plus_i - c.n_minus_i) * mean_total / ty;
  const double s3 = static_cast<double>(c.n_e - c.n_l) * mean_total / tz;
  TomographyResult out;
  out.rho = physicality_repair(density_from_stokes(mean_total, s1, s2, s3));
  out.fidelity = state_fidelity(out.rho, expected_output_state(input_state));
  return out;
}

}  // namespace tsim
