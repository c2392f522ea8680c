#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "specnoise/kernels.hpp"

using namespace specnoise;

TEST_CASE("parallel kernels match the serial references and are thread-count invariant") {
  std::mt19937_64 g(21);
  for (Eigen::Index n : {1, 63, 64, 65, 300}) {
    const Matrix s = testutil::symmetric(g, n).dense();
    const Matrix b = testutil::gaussian(g, n, 3);
    const Matrix ref = kernels::serial::block_product(s, b);
    CHECK((ref - s * b).cwiseAbs().maxCoeff() < 1e-10);
    const Matrix p1 = kernels::parallel::block_product(s, b, 1);
    CHECK((p1 - ref).cwiseAbs().maxCoeff() < 1e-10);
    for (int t : {2, 3, 8}) {
      const Matrix pt = kernels::parallel::block_product(s, b, t);
      CHECK((pt.array() == p1.array()).all());
      const Vector rn = kernels::parallel::row_norms(b, t);
      CHECK((rn.array() == kernels::parallel::row_norms(b, 1).array()).all());
    }
    CHECK((kernels::serial::row_norms(b) - b.rowwise().norm()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("power_sequence returns S^k B for k = 1..k_max") {
  std::mt19937_64 g(22);
  const Matrix s = testutil::symmetric(g, 50).dense() / 10.0;
  const Matrix b = testutil::gaussian(g, 50, 2);
  const auto ser = kernels::serial::power_sequence(s, b, 4);
  const auto par1 = kernels::parallel::power_sequence(s, b, 4, 1);
  const auto par4 = kernels::parallel::power_sequence(s, b, 4, 4);
  REQUIRE(ser.size() == 4);
  Matrix expect = b;
  for (int k = 0; k < 4; ++k) {
    expect = s * expect;
    CHECK((ser[k] - expect).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((par1[k] - expect).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((par4[k].array() == par1[k].array()).all());
  }
  CHECK(kernels::serial::power_sequence(s, b, 0).empty());
}
