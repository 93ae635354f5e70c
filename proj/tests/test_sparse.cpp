#include <doctest.h>

#include <random>
#include <sstream>
#include <stdexcept>

#include "oracles.hpp"
#include "topopt/cholesky.hpp"
#include "topopt/kernels.hpp"
#include "topopt/sparse.hpp"

using namespace topopt;

TEST_CASE("CSR construction enforces its invariants") {
  CHECK_NOTHROW(SparseMatrix(2, 2, {0, 1, 2}, {0, 1}, {1.0, 2.0}));
  // Column indices out of order within a row.
  CHECK_THROWS_AS(SparseMatrix(1, 3, {0, 2}, {2, 0}, {1.0, 1.0}), std::invalid_argument);
  // Duplicate column.
  CHECK_THROWS_AS(SparseMatrix(1, 3, {0, 2}, {1, 1}, {1.0, 1.0}), std::invalid_argument);
  // Offsets not ending at nnz.
  CHECK_THROWS_AS(SparseMatrix(2, 2, {0, 1, 1}, {0, 1}, {1.0, 2.0}), std::invalid_argument);
  // Column out of range.
  CHECK_THROWS_AS(SparseMatrix(1, 2, {0, 1}, {2}, {1.0}), std::invalid_argument);
}

TEST_CASE("from_triplets sums duplicates and sorts columns") {
  const auto a = SparseMatrix::from_triplets(2, 3, {{0, 2, 1.0}, {0, 0, 2.0}, {0, 2, 3.0}, {1, 1, -1.0}});
  CHECK(a.nnz() == 3);
  CHECK(a.at(0, 0) == 2.0);
  CHECK(a.at(0, 2) == 4.0);
  CHECK(a.at(1, 1) == -1.0);
  CHECK(a.at(1, 0) == 0.0);
  const auto cols = a.row_cols(0);
  CHECK(cols[0] < cols[1]);
  const auto offs = a.row_offsets();
  for (std::size_t i = 1; i < offs.size(); ++i) CHECK(offs[i] >= offs[i - 1]);
  CHECK(static_cast<std::size_t>(offs.back()) == a.nnz());
}

TEST_CASE("spmv examples") {
  const Vector v = {1.0, 2.0, 3.0};
  CHECK(spmv(SparseMatrix::identity(3), v) == v);
  const Vector out = spmv(SparseMatrix::zero(2, 2), Vector{5.0, -7.0});
  CHECK(out == Vector{0.0, 0.0});

  std::mt19937_64 rng(1);
  const Eigen::MatrixXd a = oracle::random_spd(rng, 5);
  const Vector x = oracle::random_vector(rng, 5);
  const Vector y = spmv(oracle::sparse(a), x);
  const Eigen::VectorXd ref = a * oracle::vec(x);
  for (int i = 0; i < 5; ++i) CHECK(std::abs(y[i] - ref[i]) <= 1e-13);
  CHECK_THROWS_AS(spmv(oracle::sparse(a), Vector{1.0}), std::invalid_argument);
}

TEST_CASE("spmv is linear") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const SparseMatrix a = oracle::random_sparse_spd(rng, 40, 0.2);
    const Vector v = oracle::random_vector(rng, 40);
    const Vector w = oracle::random_vector(rng, 40);
    const double alpha = 0.7;
    const double beta = -1.3;
    Vector comb(40);
    for (int i = 0; i < 40; ++i) comb[i] = alpha * v[i] + beta * w[i];
    const Vector lhs = spmv(a, comb);
    const Vector av = spmv(a, v);
    const Vector aw = spmv(a, w);
    double err = 0.0;
    double ref = 0.0;
    for (int i = 0; i < 40; ++i) {
      const double r = alpha * av[i] + beta * aw[i];
      err = std::max(err, std::abs(lhs[i] - r));
      ref = std::max(ref, std::abs(r));
    }
    CHECK(err <= 1e-12 * std::max(ref, 1.0));
  }
}

TEST_CASE("transpose, multiply, add and scale_columns match dense algebra") {
  std::mt19937_64 rng(3);
  Eigen::MatrixXd a = Eigen::MatrixXd::Random(6, 4);
  Eigen::MatrixXd b = Eigen::MatrixXd::Random(4, 5);
  a(2, 1) = 0.0;
  b(0, 3) = 0.0;
  const auto sa = oracle::sparse(a);
  const auto sb = oracle::sparse(b);
  CHECK((oracle::dense(transpose(sa)) - a.transpose()).norm() == 0.0);
  CHECK((oracle::dense(multiply(sa, sb)) - a * b).cwiseAbs().maxCoeff() <= 1e-14);
  const Eigen::MatrixXd c = Eigen::MatrixXd::Random(6, 4);
  CHECK((oracle::dense(add(sa, oracle::sparse(c), 2.0, -0.5)) - (2.0 * a - 0.5 * c)).cwiseAbs().maxCoeff() <= 1e-15);
  const Vector d = oracle::random_vector(rng, 4);
  CHECK((oracle::dense(scale_columns(sa, d)) - a * oracle::vec(d).asDiagonal()).cwiseAbs().maxCoeff() <= 1e-15);
  const Vector v = oracle::random_vector(rng, 6);
  const Vector atv = spmv_transpose(sa, v);
  CHECK((oracle::vec(atv) - a.transpose() * oracle::vec(v)).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK_THROWS_AS(multiply(sa, sa), std::invalid_argument);
}

TEST_CASE("is_symmetric and diagonal") {
  std::mt19937_64 rng(4);
  const SparseMatrix s = oracle::random_sparse_spd(rng, 20, 0.3);
  CHECK(s.is_symmetric());
  const Vector diag = s.diagonal();
  for (Index i = 0; i < 20; ++i) CHECK(diag[i] == s.at(i, i));
  const auto ns = SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 1.0 + 1e-9}});
  CHECK_FALSE(ns.is_symmetric());
}

TEST_CASE("cholesky examples") {
  const auto a = SparseMatrix::from_triplets(2, 2, {{0, 0, 4.0}, {1, 1, 4.0}});
  const Vector z = CholeskyFactor::factor(a).solve(Vector{4.0, 8.0});
  CHECK(z[0] == doctest::Approx(1.0));
  CHECK(z[1] == doctest::Approx(2.0));

  const auto aug = SparseMatrix::from_triplets(
      2, 2, {{0, 0, 2.25}, {0, 1, 0.25}, {1, 0, 0.25}, {1, 1, 0.25}});
  const auto f = cholesky_factor(aug);
  const Vector sol = f.solve(Vector{1.0, 1.0});
  const Vector back = spmv(aug, sol);
  CHECK(back[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(back[1] == doctest::Approx(1.0).epsilon(1e-14));

  const auto singular = SparseMatrix::from_triplets(
      3, 3, {{0, 0, 1.0}, {1, 1, 0.0}, {2, 2, 0.0}});
  CHECK_THROWS_AS(CholeskyFactor::factor(singular), NotPositiveDefinite);
  try {
    CholeskyFactor::factor(singular);
  } catch (const NotPositiveDefinite& e) {
    CHECK(std::string(e.what()).find("matrix not positive definite") != std::string::npos);
    CHECK(e.pivot() == 1);
  }
}

TEST_CASE("cholesky round trip on random SPD systems") {
  std::mt19937_64 rng(5);
  for (int n : {1, 7, 50, 200}) {
    const SparseMatrix a = oracle::random_sparse_spd(rng, n, 0.05);
    const Vector b = oracle::random_vector(rng, n);
    const auto f = CholeskyFactor::factor(a);
    const Vector x = f.solve(b);
    Vector r = spmv(a, x);
    for (int i = 0; i < n; ++i) r[i] -= b[i];
    CHECK(kernels::norm2(r) <= 1e-10 * kernels::norm2(b));

    // solve(factor, A v) recovers v.
    const Vector v = oracle::random_vector(rng, n);
    const Vector w = f.solve(spmv(a, v));
    double err = 0.0;
    for (int i = 0; i < n; ++i) err += (w[i] - v[i]) * (w[i] - v[i]);
    CHECK(std::sqrt(err) <= 1e-10 * kernels::norm2(v));

    const auto recon = f.reconstruct_dense();
    const auto dense = a.to_dense();
    double diff = 0.0;
    for (std::size_t k = 0; k < dense.size(); ++k) diff = std::max(diff, std::abs(recon[k] - dense[k]));
    CHECK(diff <= 1e-12 * n);
  }
}

TEST_CASE("gauss-seidel examples") {
  const auto diag = SparseMatrix::from_triplets(3, 3, {{0, 0, 2.0}, {1, 1, 4.0}, {2, 2, 0.5}});
  const Vector b = {2.0, 8.0, 1.0};
  for (auto dir : {SweepDirection::forward, SweepDirection::backward}) {
    Vector z = {10.0, -3.0, 7.0};
    gauss_seidel_sweep(diag, b, z, dir);
    CHECK(z == Vector{1.0, 2.0, 2.0});
  }

  std::mt19937_64 rng(6);
  const SparseMatrix a = oracle::random_sparse_spd(rng, 12, 0.4);
  const Vector z0 = oracle::random_vector(rng, 12);
  const Vector fixed_b = spmv(a, z0);
  Vector z = z0;
  gauss_seidel_sweep(a, fixed_b, z, SweepDirection::forward);
  for (int i = 0; i < 12; ++i) CHECK(z[i] == doctest::Approx(z0[i]).epsilon(1e-14));

  const Eigen::Matrix2d m2{{3.0, 1.0}, {1.0, 2.0}};
  const auto s2 = oracle::sparse(m2);
  const Vector rhs = {1.0, -1.0};
  const Eigen::Vector2d exact = m2.ldlt().solve(oracle::vec(rhs));
  Vector iter = {5.0, 5.0};
  const double e0 = (oracle::vec(iter) - exact).norm();
  gauss_seidel_sweep(s2, rhs, iter, SweepDirection::forward);
  gauss_seidel_sweep(s2, rhs, iter, SweepDirection::forward);
  CHECK((oracle::vec(iter) - exact).norm() < e0);

  const auto zero_diag = SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}});
  Vector zz = {0.0, 0.0};
  CHECK_THROWS_AS(gauss_seidel_sweep(zero_diag, rhs, zz, SweepDirection::forward), std::domain_error);
}

TEST_CASE("forward then backward gauss-seidel is a symmetric preconditioner") {
  std::mt19937_64 rng(7);
  const SparseMatrix a = oracle::random_sparse_spd(rng, 30, 0.2);
  auto apply = [&](const Vector& r) {
    Vector z(r.size(), 0.0);
    gauss_seidel_sweep(a, r, z, SweepDirection::forward);
    gauss_seidel_sweep(a, r, z, SweepDirection::backward);
    return z;
  };
  for (int trial = 0; trial < 10; ++trial) {
    const Vector u = oracle::random_vector(rng, 30);
    const Vector v = oracle::random_vector(rng, 30);
    const double lhs = kernels::dot(apply(u), v);
    const double rhs = kernels::dot(u, apply(v));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
    CHECK(kernels::dot(apply(u), u) > 0.0);
  }
}

TEST_CASE("matrix market output") {
  const auto a = SparseMatrix::from_triplets(2, 3, {{0, 0, 1.5}, {1, 2, -2.0}});
  std::ostringstream out;
  write_matrix_market(a, out);
  CHECK(out.str() == "%%MatrixMarket matrix coordinate real general\n2 3 2\n1 1 1.5\n2 3 -2\n");
}
