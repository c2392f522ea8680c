#include <doctest.h>

#include <cmath>

#include "specnoise/error.hpp"
#include "specnoise/models.hpp"

using namespace specnoise;

TEST_CASE("three-block population spectrum") {
  const auto pop = sbm_population(three_block_spec(300));
  const auto dec = full_eig(pop.p);
  CHECK(dec.values(0) == doctest::Approx(110.0).epsilon(1e-12));
  CHECK(dec.values(1) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(dec.values(2) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(std::abs(dec.values(3)) < 1e-10);
  const auto top = top_r(pop.p, 3);
  CHECK(top.values(2) == doctest::Approx(20.0).epsilon(1e-12));

  // |Lambda_rr| = 0.2 (n/3) rho >= n rho / 15, |Lambda_11| / |Lambda_rr| = 5.5 at every n.
  for (Eigen::Index n : {300, 600, 1200}) {
    const auto p = top_r(sbm_population(three_block_spec(n, 0.5)).p, 3);
    CHECK(p.values(2) / (n * 0.5) == doctest::Approx(1.0 / 15.0).epsilon(1e-10));
    CHECK(p.values(0) / p.values(2) == doctest::Approx(5.5).epsilon(1e-10));
  }
}

TEST_CASE("population matrix, memberships and latent positions") {
  const SbmSpec spec = two_block_spec(200);
  const auto pop = sbm_population(spec);
  REQUIRE(pop.block_sizes.size() == 2);
  CHECK(pop.block_sizes[0] == 80);
  CHECK(pop.block_sizes[1] == 120);
  CHECK(pop.memberships[79] == 0);
  CHECK(pop.memberships[80] == 1);
  CHECK(pop.p(0, 199) == 0.3);
  CHECK(pop.p(0, 1) == 0.5);

  const auto& lat = *pop.latent;
  CHECK(lat.rank == 2);
  CHECK(lat.factor == LatentFactor::cholesky);
  CHECK(lat.block_eigenvalues(0) == doctest::Approx(0.4 + std::sqrt(0.1)).epsilon(1e-12));  // 0.71623
  CHECK(lat.block_eigenvalues(1) == doctest::Approx(0.4 - std::sqrt(0.1)).epsilon(1e-12));  // 0.08377
  CHECK(((lat.x * lat.x.transpose()) - pop.p.dense()).cwiseAbs().maxCoeff() <= 1e-12);

  const auto eig = latent_from_B(spec.b, pop.memberships, LatentFactor::eigen);
  CHECK(((eig.x * eig.x.transpose()) - pop.p.dense()).cwiseAbs().maxCoeff() <= 1e-12);

  const std::vector<int> labels = {0, 1, 2};
  const auto ident = latent_from_B(Matrix::Identity(3, 3), labels, LatentFactor::eigen);
  // Repeated eigenvalues leave the basis free; only nu nu^T = B is pinned.
  CHECK((ident.nu * ident.nu.transpose() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("single block and rank-deficient B") {
  SbmSpec spec;
  spec.b = Matrix::Constant(1, 1, 0.2);
  spec.pi = Vector::Ones(1);
  spec.n = 50;
  const auto pop = sbm_population(spec);
  CHECK(top_r(pop.p, 1).values(0) == doctest::Approx(10.0));

  Matrix b(2, 2);
  b << 0.25, 0.25, 0.25, 0.25;
  const std::vector<int> g = {0, 1};
  const auto lat = latent_from_B(b, g);
  CHECK(lat.rank == 1);
  CHECK(lat.factor == LatentFactor::eigen);
  CHECK_THROWS_AS(latent_from_B(b, g, LatentFactor::cholesky), InvalidInput);
}

TEST_CASE("SbmSpec validation names the violation") {
  SbmSpec s = two_block_spec(200);
  s.b(0, 1) = 0.31;
  CHECK_THROWS_WITH_AS(validate(s), doctest::Contains("symmetric"), InvalidInput);
  s = two_block_spec(200);
  s.b(0, 0) = 1.5;
  CHECK_THROWS_AS(validate(s), InvalidInput);
  s = two_block_spec(200);
  s.pi(0) = 0.5;
  CHECK_THROWS_WITH_AS(validate(s), doctest::Contains("sum"), InvalidInput);
  s = two_block_spec(200, 0.0);
  CHECK_THROWS_AS(validate(s), InvalidInput);
  s = three_block_spec(300);
  CHECK_NOTHROW(validate(s));
  s.n = 302;  // 100.67 rounds up three times
  CHECK_THROWS_AS(validate(s), InvalidInput);

  SbmSpec indefinite = two_block_spec(20);
  indefinite.b << 0.1, 0.9, 0.9, 0.1;
  CHECK_NOTHROW(sbm_population(indefinite, false));
  CHECK_THROWS_WITH_AS(sbm_population(indefinite, true), doctest::Contains("not positive semidefinite"), InvalidInput);
}

TEST_CASE("Bernoulli adjacency is centered and deterministic") {
  const auto pop = sbm_population(two_block_spec(200), false);
  CHECK(sbm_sample(pop.p, 0).e.dense() == sbm_sample(pop.p, 0).e.dense());
  CHECK(sbm_sample(pop.p, 0).e.dense() != sbm_sample(pop.p, 1).e.dense());

  const int reps = 1000;
  Matrix sum = Matrix::Zero(200, 200);
  for (int s = 0; s < reps; ++s) {
    const auto inst = sbm_sample(pop.p, static_cast<std::uint64_t>(s));
    CHECK(inst.m_hat.dense() == inst.m.dense() + inst.e.dense());
    sum += inst.m_hat.dense();
  }
  const Matrix mean = sum / reps;
  // Entrywise 3 SE holds for ~99.7% of the 20100 distinct entries; check the
  // fraction, plus every block-pooled mean at 3 SE.
  long inside = 0, total = 0;
  for (Eigen::Index j = 0; j < 200; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double p = pop.p(i, j);
      inside += std::abs(mean(i, j) - p) <= 3.0 * std::sqrt(p * (1 - p) / reps);
      ++total;
    }
  }
  CHECK(static_cast<double>(inside) / total >= 0.99);
  for (auto [r0, c0, len_r, len_c] : {std::array<Eigen::Index, 4>{0, 0, 80, 80}, {0, 80, 80, 120}, {80, 80, 120, 120}}) {
    const double p = pop.p(r0, c0);
    const double pooled = mean.block(r0, c0, len_r, len_c).mean();
    const double se = std::sqrt(p * (1 - p) / (reps * static_cast<double>(len_r * len_c) / 2.0));
    CHECK(std::abs(pooled - p) <= 3.0 * se);
  }

  CHECK(sbm_sample(SymmetricMatrix(5), 3).e.dense().isZero());
  const auto ones = sbm_sample(SymmetricMatrix::from_upper(Matrix::Ones(5, 5)), 3);
  CHECK(ones.e.dense().isZero());
  CHECK(ones.m_hat.dense() == Matrix::Ones(5, 5));
  CHECK_THROWS_AS(sbm_sample(SymmetricMatrix::from_upper(Matrix::Constant(3, 3, 1.2)), 0), InvalidInput);

  const auto hollow = sbm_sample(SymmetricMatrix::from_upper(Matrix::Ones(4, 4)), 0, true);
  CHECK(hollow.m_hat.dense().diagonal().isZero());
}

TEST_CASE("noise ensembles: variances, symmetry and zero mean") {
  CHECK(noise_variance({NoiseKind::laplace, 1.0 / std::sqrt(2.0), {}}) == doctest::Approx(1.0));
  CHECK(noise_variance({NoiseKind::uniform, 1.0, {}}) == doctest::Approx(1.0 / 3.0));
  CHECK(noise_variance({NoiseKind::centered_bernoulli, 0.2, {}}) == doctest::Approx(0.16));
  CHECK(noise_sample({NoiseKind::gaussian, 0.0, {}}, 10, 1).dense().isZero());
  CHECK_THROWS_AS(noise_sample({NoiseKind::laplace, 0.0, {}}, 10, 1), InvalidInput);
  CHECK_THROWS_AS(noise_sample({NoiseKind::uniform, -1.0, {}}, 10, 1), InvalidInput);

  for (NoiseSpec noise : {NoiseSpec{NoiseKind::gaussian, 2.0, {}}, NoiseSpec{NoiseKind::laplace, 0.5, {}},
                          NoiseSpec{NoiseKind::uniform, 1.0, {}}, NoiseSpec{NoiseKind::centered_bernoulli, 0.3, {}}}) {
    const double var = noise_variance(noise);
    double sum = 0.0, sumsq = 0.0;
    const int reps = 10000;
    const int entries = 20 * 21 / 2;
    for (int s = 0; s < reps; ++s) {
      const auto e = noise_sample(noise, 20, static_cast<std::uint64_t>(s));
      CHECK(e.dense() == e.dense().transpose());
      for (Eigen::Index j = 0; j < 20; ++j)
        for (Eigen::Index i = 0; i <= j; ++i) {
          sum += e(i, j);
          sumsq += e(i, j) * e(i, j);
        }
    }
    const double m = static_cast<double>(reps) * entries;
    CHECK(std::abs(sum / m) <= 4.0 * std::sqrt(var / m));
    CHECK(sumsq / m == doctest::Approx(var).epsilon(0.01));
  }

  SymmetricMatrix profile = SymmetricMatrix::from_upper(Matrix::Constant(3, 3, 4.0));
  NoiseSpec prof{NoiseKind::gaussian, 1.0, profile};
  CHECK(noise_variance(prof, 0, 2) == 4.0);
  CHECK_THROWS_AS(noise_variance(prof), InvalidInput);
}

TEST_CASE("spike models") {
  const auto one = constant_spike(500, 500.0, {NoiseKind::laplace, 1.0 / std::sqrt(2.0), {}});
  const auto inst = spike_model(one, 9);
  CHECK(inst.m(0, 0) == doctest::Approx(1.0));
  CHECK(inst.m_hat.dense() == inst.m.dense() + inst.e.dense());
  CHECK(spike_latent(one).isApproxToConstant(1.0, 1e-12));

  const auto two = sign_split_spike(10, 10.0, {NoiseKind::uniform, 1.0, {}});
  CHECK(two.signal->orthogonality_defect() < 1e-15);
  CHECK_THROWS_AS(sign_split_spike(9, 9.0, {}), InvalidInput);

  const auto quiet = constant_spike(40, 40.0, {NoiseKind::gaussian, 0.0, {}});
  const auto qi = spike_model(quiet, 1);
  const auto p = top_r(qi.m_hat, 1);
  CHECK(p.values(0) == doctest::Approx(40.0));
  CHECK((p.vectors - quiet.signal->vectors).cwiseAbs().maxCoeff() < 1e-12);

  SpikeSpec lat;
  lat.n = 30;
  lat.latent = Matrix::Ones(30, 2);
  CHECK_THROWS_WITH_AS(validate(lat), doctest::Contains("singular"), InvalidInput);
  SpikeSpec none;
  none.n = 5;
  CHECK_THROWS_AS(validate(none), InvalidInput);
}

TEST_CASE("noise spectral norm stays within the concentration envelope") {
  const auto pop = sbm_population(two_block_spec(1000), false);
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    const auto inst = sbm_sample(pop.p, static_cast<std::uint64_t>(1000 + s));
    worst = std::max(worst, spectral_norm(inst.e) / std::sqrt(1000.0));
  }
  CHECK(worst <= 3.0);
}
