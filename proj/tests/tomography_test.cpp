#include "teleportsim/tomography.hpp"

#include <cmath>
#include <cstdint>

#include <gtest/gtest.h>

namespace tsim {
namespace {

TomographyCounts counts_from_bloch(double rx, double ry, double rz,
                                   double scale) {
  TomographyCounts c;
  c.n_e = static_cast<std::int64_t>(std::llround(scale * 0.5 * (1.0 + rz)));
  c.n_l = static_cast<std::int64_t>(std::llround(scale * 0.5 * (1.0 - rz)));
  c.n_plus = static_cast<std::int64_t>(std::llround(scale * 0.5 * (1.0 + rx)));
  c.n_minus = static_cast<std::int64_t>(std::llround(scale * 0.5 * (1.0 - rx)));
  c.n_plus_i =
      static_cast<std::int64_t>(std::llround(scale * 0.5 * (1.0 + ry)));
  c.n_minus_i =
      static_cast<std::int64_t>(std::llround(scale * 0.5 * (1.0 - ry)));
  return c;
}

TEST(StokesFromCounts, RawBasisDifferences) {
  TomographyCounts c;
  c.n_e = 78;
  c.n_l = 922;
  c.n_plus = 250;
  c.n_minus = 250;
  c.n_plus_i = 300;
  c.n_minus_i = 200;
  const auto s = stokes_from_counts(c);
  EXPECT_EQ(s[0], 1000);
  EXPECT_EQ(s[1], 0);
  EXPECT_EQ(s[2], 100);
  EXPECT_EQ(s[3], -844);
  c.n_e = -1;
  EXPECT_THROW(stokes_from_counts(c), InputError);
}

TEST(DensityMatrix, BlochRoundTrip) {
  const DensityMatrix rho = density_from_bloch(0.36, -0.48, 0.64);
  const auto r = bloch_vector(rho);
  EXPECT_DOUBLE_EQ(r[0], 0.36);
  EXPECT_DOUBLE_EQ(r[1], -0.48);
  EXPECT_DOUBLE_EQ(r[2], 0.64);
  EXPECT_NO_THROW(validate(rho));
  const auto eig = eigenvalues(rho);
  EXPECT_NEAR(eig[0] + eig[1], 1.0, 1e-15);
  EXPECT_GE(eig[0], 0.0);
}

TEST(DensityMatrix, ValidationCatchesBadMatrices) {
  DensityMatrix rho = density_from_bloch(0.2, 0.0, 0.1);
  rho.m[0][0] += 0.1;
  EXPECT_THROW(validate(rho), InputError);
  rho = density_from_bloch(0.2, 0.0, 0.1);
  rho.m[0][1] = {0.3, 0.0};
  EXPECT_THROW(validate(rho), InputError);
  EXPECT_THROW(density_from_stokes(0.0, 0.0, 0.0, 0.0), InputError);
}

TEST(PhysicalityRepair, ShrinksOnlyOutsideTheSphere) {
  const DensityMatrix inside = density_from_bloch(0.3, -0.5, 0.2);
  const DensityMatrix repaired = physicality_repair(inside);
  EXPECT_EQ(repaired.m[0][1], inside.m[0][1]);
  EXPECT_EQ(repaired.m[0][0], inside.m[0][0]);

  const DensityMatrix outside = density_from_bloch(0.9, 0.0, 0.9);
  const auto r = bloch_vector(physicality_repair(outside));
  const double len = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
  EXPECT_NEAR(len, 1.0, 1e-12);
  EXPECT_NEAR(r[0] / r[2], 1.0, 1e-12);
}

TEST(StateFidelity, PureStateProjection) {
  const DensityMatrix rho = density_from_bloch(-1.0, 0.0, 0.0);
  EXPECT_NEAR(state_fidelity(rho, qubit_from_label("-")), 1.0, 1e-12);
  EXPECT_NEAR(state_fidelity(rho, qubit_from_label("+")), 0.0, 1e-12);
  EXPECT_NEAR(state_fidelity(rho, qubit_from_label("e")), 0.5, 1e-12);
}

TEST(StateFidelity, RejectsNonphysicalMatrix) {
  const DensityMatrix bad = density_from_bloch(1.0, 0.0, 0.9);
  EXPECT_THROW(state_fidelity(bad, qubit_from_label("e")), NumericalError);
}

TEST(TomographyPipeline, PoleInputReproducesCountRatio) {
  TomographyCounts c;
  c.n_e = 78;
  c.n_l = 922;
  c.n_plus = 250;
  c.n_minus = 250;
  c.n_plus_i = 250;
  c.n_minus_i = 250;
  const TomographyResult r = tomography_pipeline(c, qubit_from_label("e"));
  EXPECT_NEAR(r.rho.m[1][1].real(), 0.922, 1e-12);
  EXPECT_NEAR(r.fidelity, 0.922, 1e-12);
}

TEST(TomographyPipeline, PlusInputMapsToMinus) {
  TomographyCounts c;
  c.n_e = 500000;
  c.n_l = 500000;
  c.n_plus = 0;
  c.n_minus = 1000000;
  c.n_plus_i = 500000;
  c.n_minus_i = 500000;
  const TomographyResult r = tomography_pipeline(c, qubit_from_label("+"));
  EXPECT_NEAR(r.fidelity, 1.0, 1e-12);
  const auto bloch = bloch_vector(r.rho);
  EXPECT_NEAR(bloch[0], -1.0, 1e-12);
  EXPECT_NEAR(bloch[1], 0.0, 1e-12);
  EXPECT_NEAR(bloch[2], 0.0, 1e-12);
}

TEST(TomographyPipeline, EqualCountsGiveMaximallyMixedState) {
  TomographyCounts c;
  c.n_e = c.n_l = c.n_plus = c.n_minus = c.n_plus_i = c.n_minus_i = 1000;
  const TomographyResult r = tomography_pipeline(c, qubit_from_label("+"));
  EXPECT_NEAR(r.fidelity, 0.5, 1e-12);
  const auto bloch = bloch_vector(r.rho);
  EXPECT_NEAR(std::abs(bloch[0]) + std::abs(bloch[1]) + std::abs(bloch[2]),
              0.0, 1e-12);
}

TEST(TomographyPipeline, UnequalBasisIntegrationCancels) {
  TomographyCounts c = counts_from_bloch(0.36, -0.48, 0.64, 1e6);
  TomographyCounts scaled = c;
  scaled.n_plus *= 3;
  scaled.n_minus *= 3;
  const TomographyResult r1 = tomography_pipeline(c, qubit_from_label("e"));
  const TomographyResult r2 =
      tomography_pipeline(scaled, qubit_from_label("e"));
  const auto b1 = bloch_vector(r1.rho);
  const auto b2 = bloch_vector(r2.rho);
  EXPECT_NEAR(b1[0], b2[0], 1e-9);
  EXPECT_NEAR(b1[1], b2[1], 1e-9);
  EXPECT_NEAR(b1[2], b2[2], 1e-9);
}

TEST(TomographyPipeline, HighCountRoundTripIsExact) {
  const double rx = 0.36, ry = -0.48, rz = 0.64;
  const TomographyCounts c = counts_from_bloch(rx, ry, rz, 1e12);
  const TomographyResult r = tomography_pipeline(c, qubit_from_label("e"));
  const DensityMatrix expected = density_from_bloch(rx, ry, rz);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      EXPECT_NEAR(std::abs(r.rho.m[i][j] - expected.m[i][j]), 0.0, 1e-9);
    }
  }
}

TEST(TomographyPipeline, RejectsEmptyBasisPairs) {
  TomographyCounts c;
  c.n_e = 100;
  c.n_l = 100;
  c.n_plus_i = 100;
  c.n_minus_i = 100;
  EXPECT_THROW(tomography_pipeline(c, qubit_from_label("+")), InputError);
}

}  // namespace
}  // namespace tsim
