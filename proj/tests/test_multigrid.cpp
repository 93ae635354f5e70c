#include <doctest.h>

#include <random>
#include <stdexcept>
#include <string>

#include "oracles.hpp"
#include "topopt/cholesky.hpp"
#include "topopt/fem.hpp"
#include "topopt/kernels.hpp"
#include "topopt/multigrid.hpp"

using namespace topopt;

TEST_CASE("prolongation stencil") {
  const Mesh coarse(2, 2, Support::left_edge);
  const Mesh fine(4, 4, Support::left_edge);
  const SparseMatrix p = build_prolongation(fine, coarse, false);
  CHECK(p.rows() == fine.num_dofs());
  CHECK(p.cols() == coarse.num_dofs());

  // Fine node (3,1) is the centre of coarse cell (1,0).
  const Index row = fine.dof(fine.node(3, 1), 0);
  CHECK(p.row_cols(row).size() == 4);
  for (Index c : {coarse.node(1, 0), coarse.node(2, 0), coarse.node(1, 1), coarse.node(2, 1)}) {
    CHECK(p.at(row, coarse.dof(c, 0)) == 0.25);
  }
  // Components never mix.
  for (Index c = 0; c < coarse.num_nodes(); ++c) {
    if (!coarse.node_fixed(c)) CHECK(p.at(row, coarse.dof(c, 1)) == 0.0);
  }

  // Constants are reproduced wherever no fixed coarse dof is involved.
  const Vector ones(coarse.num_dofs(), 1.0);
  const Vector pf = spmv(p, ones);
  for (int i = 2; i <= fine.nx(); ++i) {
    for (int j = 0; j <= fine.ny(); ++j) {
      for (int comp = 0; comp < 2; ++comp) CHECK(pf[fine.dof(fine.node(i, j), comp)] == 1.0);
    }
  }

  const SparseMatrix pa = build_prolongation(fine, coarse, true);
  CHECK(pa.rows() == fine.num_dofs() + 1);
  CHECK(pa.cols() == coarse.num_dofs() + 1);
  const Index last = pa.rows() - 1;
  CHECK(pa.row_cols(last).size() == 1);
  CHECK(pa.at(last, pa.cols() - 1) == 1.0);
  for (Index i = 0; i < last; ++i) CHECK(pa.at(i, pa.cols() - 1) == 0.0);

  CHECK_THROWS_AS(build_prolongation(Mesh(6, 4, Support::left_edge), coarse, false), std::invalid_argument);
  CHECK_THROWS_AS(build_prolongation(Mesh(4, 4, Support::bottom_corners), coarse, false),
                  std::invalid_argument);
}

TEST_CASE("galerkin coarsening") {
  std::mt19937_64 rng(31);
  const SparseMatrix a = oracle::random_sparse_spd(rng, 30, 0.2);
  const auto same = oracle::dense(galerkin_coarsen(a, SparseMatrix::identity(30)));
  CHECK((same - oracle::dense(a)).cwiseAbs().maxCoeff() == 0.0);

  const Eigen::MatrixXd p = Eigen::MatrixXd::Random(30, 12);
  const auto c = oracle::dense(galerkin_coarsen(a, oracle::sparse(p)));
  const Eigen::MatrixXd ref = p.transpose() * oracle::dense(a) * p;
  CHECK((c - ref).cwiseAbs().maxCoeff() <= 1e-12 * ref.cwiseAbs().maxCoeff());
  CHECK(oracle::smallest_eigenvalue(c) > 0.0);

  // Coarsening twice equals coarsening once with the composed prolongation.
  const Eigen::MatrixXd q = Eigen::MatrixXd::Random(12, 5);
  const auto twice = oracle::dense(galerkin_coarsen(galerkin_coarsen(a, oracle::sparse(p)), oracle::sparse(q)));
  const auto once = oracle::dense(galerkin_coarsen(a, oracle::sparse(p * q)));
  CHECK((twice - once).cwiseAbs().maxCoeff() <= 1e-12 * once.cwiseAbs().maxCoeff());
}

TEST_CASE("hierarchy operators are Galerkin products and SPD") {
  const auto problem = FeProblem::build(preset("ex1", 3));
  const auto prolong = build_prolongations(problem.meshes, false);
  CHECK(prolong.size() == 2);
  const Vector x(problem.num_elements(), 1.0);
  const MultigridHierarchy h(assemble_stiffness(problem.finest(), problem.ke, x), prolong);
  CHECK(h.levels() == 3);
  for (int level = 0; level < h.levels(); ++level) {
    CHECK(h.op(level).is_symmetric(1e-12));
    CHECK(oracle::smallest_eigenvalue(oracle::dense(h.op(level))) > 0.0);
  }
  for (int level = 1; level < h.levels(); ++level) {
    const auto pd = oracle::dense(prolong[level - 1]);
    const Eigen::MatrixXd ref = pd.transpose() * oracle::dense(h.op(level)) * pd;
    CHECK((oracle::dense(h.op(level - 1)) - ref).cwiseAbs().maxCoeff() <= 1e-12 * ref.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("v-cycle base and zero cases") {
  const auto problem = FeProblem::build(preset("ex1", 1));
  const SparseMatrix k = assemble_stiffness(problem.finest(), problem.ke, Vector(problem.num_elements(), 1.0));
  const MultigridHierarchy h(k, {});
  CHECK(h.levels() == 1);
  auto ws = h.make_workspace();
  Vector z(k.rows(), 0.0);
  h.vcycle(0, z, problem.load, ws);
  const Vector exact = CholeskyFactor::factor(k).solve(problem.load);
  for (Index i = 0; i < k.rows(); ++i) CHECK(z[i] == doctest::Approx(exact[i]).epsilon(1e-12));

  const auto p3 = FeProblem::build(preset("ex1", 3));
  const MultigridHierarchy h3(assemble_stiffness(p3.finest(), p3.ke, Vector(p3.num_elements(), 1.0)),
                              build_prolongations(p3.meshes, false));
  auto ws3 = h3.make_workspace();
  Vector zero_z(p3.num_dofs(), 0.0);
  h3.vcycle(h3.finest_level(), zero_z, Vector(p3.num_dofs(), 0.0), ws3);
  for (double v : zero_z) CHECK(v == 0.0);
  Vector wrong(3, 0.0);
  CHECK_THROWS_AS(h3.vcycle(h3.finest_level(), wrong, wrong, ws3), std::invalid_argument);
}

TEST_CASE("v-cycle preconditioner is symmetric positive definite") {
  std::mt19937_64 rng(32);
  for (bool augmented : {false, true}) {
    const auto problem = FeProblem::build(preset("ex2", 3));
    const Vector x = oracle::random_vector(rng, problem.num_elements(), 0.05, 1.95);
    SparseMatrix a = assemble_stiffness(problem.finest(), problem.ke, x);
    if (augmented) {
      // Arrow extension: append a dense last row/column with a dominant corner.
      const Index n = a.rows();
      std::vector<Triplet> t;
      for (Index i = 0; i < n; ++i) {
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) t.push_back({i, cols[k], vals[k]});
        const double w = 0.01 * std::sin(i + 1.0);
        t.push_back({i, n, w});
        t.push_back({n, i, w});
      }
      t.push_back({n, n, 10.0});
      a = SparseMatrix::from_triplets(n + 1, n + 1, std::move(t));
    }
    const MultigridHierarchy h(a, build_prolongations(problem.meshes, augmented), SmootherConfig{1, 1});
    auto ws = h.make_workspace();
    auto apply = [&](const Vector& r) {
      Vector z(r.size());
      h.precondition(r, z, ws);
      return z;
    };
    for (int trial = 0; trial < 5; ++trial) {
      const Vector r1 = oracle::random_vector(rng, a.rows());
      const Vector r2 = oracle::random_vector(rng, a.rows());
      const double lhs = kernels::dot(apply(r1), r2);
      const double rhs = kernels::dot(r1, apply(r2));
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
      CHECK(kernels::dot(apply(r1), r1) > 0.0);
    }
  }
}

namespace {

// Relative residuals after each of `cycles` stationary steps z <- z + V(b - K z).
std::vector<double> stationary_history(const char* name, int levels, double lo, std::mt19937_64& rng,
                                       int cycles) {
  const auto problem = FeProblem::build(preset(name, levels));
  const Vector x = oracle::random_vector(rng, problem.num_elements(), lo, 2.0);
  const SparseMatrix k = assemble_stiffness(problem.finest(), problem.ke, x);
  const MultigridHierarchy h(k, build_prolongations(problem.meshes, false));
  auto ws = h.make_workspace();
  const Vector& b = problem.load;
  Vector z(k.rows(), 0.0);
  Vector res(k.rows());
  Vector corr(k.rows());
  std::vector<double> history;
  for (int cycle = 0; cycle < cycles; ++cycle) {
    spmv(k, z, res);
    kernels::scale_add(1.0, b, -1.0, res);
    h.precondition(res, corr, ws);
    kernels::axpy(1.0, corr, z);
    spmv(k, z, res);
    kernels::scale_add(1.0, b, -1.0, res);
    history.push_back(kernels::norm2(res) / kernels::norm2(b));
  }
  return history;
}

}  // namespace

TEST_CASE("stationary v-cycle iteration converges for positive densities") {
  std::mt19937_64 rng(33);
  // Edge-supported meshes: 20 cycles reach 1e-8.
  for (int levels = 2; levels <= 4; ++levels) {
    for (const auto* name : {"ex1", "ex2"}) {
      CAPTURE(std::string(name));
      CAPTURE(levels);
      CHECK(stationary_history(name, levels, 0.1, rng, 20).back() <= 1e-8);
    }
  }
  // Point supports and high contrast: still a contraction, but slower
  // (the point constraint weakens under refinement).
  for (int levels = 2; levels <= 4; ++levels) {
    for (const auto* name : {"ex1", "ex3"}) {
      const auto h = stationary_history(name, levels, 0.01, rng, 20);
      CAPTURE(std::string(name));
      CAPTURE(levels);
      for (std::size_t i = 1; i < h.size(); ++i) CHECK(h[i] < h[i - 1]);
    }
  }
}
