// Dense reference computations shared by the unit and acceptance tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "topopt/fem.hpp"
#include "topopt/ipm.hpp"
#include "topopt/sparse.hpp"

namespace oracle {

using topopt::Index;
using topopt::SparseMatrix;
using topopt::Vector;

inline Eigen::MatrixXd dense(const SparseMatrix& a) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) out(i, cols[k]) = vals[k];
  }
  return out;
}

inline Eigen::VectorXd vec(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Vector stl(const Eigen::VectorXd& v) { return Vector(v.data(), v.data() + v.size()); }

inline SparseMatrix sparse(const Eigen::MatrixXd& a) {
  std::vector<double> rm(static_cast<std::size_t>(a.size()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) rm[i * a.cols() + j] = a(i, j);
  }
  return SparseMatrix::from_dense(static_cast<Index>(a.rows()), static_cast<Index>(a.cols()), rm);
}

inline Vector random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Vector v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

inline Eigen::MatrixXd random_spd(std::mt19937_64& rng, int n, double shift = 1.0) {
  Eigen::MatrixXd g(n, n);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) g(i, j) = dist(rng);
  }
  return g * g.transpose() + shift * Eigen::MatrixXd::Identity(n, n);
}

/// Sparse SPD matrix: random symmetric pattern plus a dominant diagonal.
inline SparseMatrix random_sparse_spd(std::mt19937_64& rng, int n, double density = 0.1) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      if (coin(rng) < density) a(i, j) = a(j, i) = dist(rng);
    }
  }
  for (int i = 0; i < n; ++i) a(i, i) = a.row(i).cwiseAbs().sum() + 1.0;
  return sparse(a);
}

inline double smallest_eigenvalue(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Plane-stress stiffness of the unit square by 2x2 Gauss quadrature of
/// B^T C B, independent of the closed form used by the library.
inline Eigen::Matrix<double, 8, 8> quadrature_element(double young, double nu) {
  Eigen::Matrix3d c;
  c << 1.0, nu, 0.0, nu, 1.0, 0.0, 0.0, 0.0, 0.5 * (1.0 - nu);
  c *= young / (1.0 - nu * nu);
  const double g = 1.0 / std::sqrt(3.0);
  const double pts[2] = {0.5 - 0.5 * g, 0.5 + 0.5 * g};
  // Node order (0,0), (1,0), (1,1), (0,1).
  const double nx[4] = {0.0, 1.0, 1.0, 0.0};
  const double ny[4] = {0.0, 0.0, 1.0, 1.0};
  Eigen::Matrix<double, 8, 8> ke = Eigen::Matrix<double, 8, 8>::Zero();
  for (double px : pts) {
    for (double py : pts) {
      Eigen::Matrix<double, 3, 8> b = Eigen::Matrix<double, 3, 8>::Zero();
      for (int a = 0; a < 4; ++a) {
        const double sx = nx[a] == 1.0 ? 1.0 : -1.0;
        const double sy = ny[a] == 1.0 ? 1.0 : -1.0;
        const double dndx = sx * (ny[a] == 1.0 ? py : 1.0 - py);
        const double dndy = sy * (nx[a] == 1.0 ? px : 1.0 - px);
        b(0, 2 * a) = dndx;
        b(1, 2 * a + 1) = dndy;
        b(2, 2 * a) = dndy;
        b(2, 2 * a + 1) = dndx;
      }
      ke += 0.25 * b.transpose() * c * b;
    }
  }
  return ke;
}

/// Euclidean projection onto {sum x = V, lo <= x <= hi} by bisection on the shift.
inline Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& y, double volume, double lo,
                                              double hi) {
  double a = (y.array() - hi).minCoeff() - 1.0;
  double b = (y.array() - lo).maxCoeff() + 1.0;
  auto clamp_sum = [&](double t) { return (y.array() - t).max(lo).min(hi).sum(); };
  for (int it = 0; it < 200; ++it) {
    const double t = 0.5 * (a + b);
    if (clamp_sum(t) > volume) {
      a = t;
    } else {
      b = t;
    }
  }
  return (y.array() - 0.5 * (a + b)).max(lo).min(hi).matrix();
}

/// Dense model of a tiny VTS problem: compliance f^T K(x)^{-1} f and its gradient.
struct DenseVts {
  std::vector<Eigen::MatrixXd> k_elem;  // element stiffness scattered to free dofs
  Eigen::VectorXd f;

  static DenseVts from(const topopt::FeProblem& p) {
    DenseVts d;
    const auto& mesh = p.finest();
    d.f = vec(p.load);
    for (Index e = 0; e < mesh.num_elements(); ++e) {
      Vector w(mesh.num_elements(), 0.0);
      w[e] = 1.0;
      d.k_elem.push_back(dense(topopt::assemble_stiffness(mesh, p.ke, w)));
    }
    return d;
  }

  Eigen::MatrixXd k(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(f.size(), f.size());
    for (std::size_t e = 0; e < k_elem.size(); ++e) out += x[static_cast<Eigen::Index>(e)] * k_elem[e];
    return out;
  }

  /// Returns f^T u and fills grad_i = -u^T K_i u.
  double value(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
    const Eigen::VectorXd u = k(x).ldlt().solve(f);
    if (grad) {
      grad->resize(static_cast<Eigen::Index>(k_elem.size()));
      for (std::size_t e = 0; e < k_elem.size(); ++e) {
        (*grad)[static_cast<Eigen::Index>(e)] = -u.dot(k_elem[e] * u);
      }
    }
    return f.dot(u);
  }
};

/// Projected gradient with Barzilai-Borwein steps and Armijo backtracking on
/// the projection arc, for min f^T K(x)^{-1} f over the capped simplex.
inline Eigen::VectorXd projected_gradient(const DenseVts& model, double volume, double lo,
                                          double hi, int max_iterations = 200000,
                                          double tol = 1e-13) {
  const auto m = static_cast<Eigen::Index>(model.k_elem.size());
  Eigen::VectorXd x = Eigen::VectorXd::Constant(m, volume / static_cast<double>(m));
  Eigen::VectorXd g;
  double fx = model.value(x, &g);
  double step = 1.0 / std::max(g.cwiseAbs().maxCoeff(), 1e-30);
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::VectorXd pg = x - project_capped_simplex(x - g, volume, lo, hi);
    if (pg.cwiseAbs().maxCoeff() <= tol) break;
    double t = step;
    Eigen::VectorXd xn;
    Eigen::VectorXd gn;
    double fn = 0.0;
    for (int ls = 0; ls < 60; ++ls) {
      xn = project_capped_simplex(x - t * g, volume, lo, hi);
      fn = model.value(xn, &gn);
      if (fn <= fx + 1e-4 * g.dot(xn - x)) break;
      t *= 0.5;
    }
    const Eigen::VectorXd sx = xn - x;
    const Eigen::VectorXd sg = gn - g;
    const double sy = sx.dot(sg);
    step = sy > 0.0 ? std::clamp(sx.squaredNorm() / sy, 1e-12, 1e12) : 1.0;
    x = xn;
    g = gn;
    fx = fn;
  }
  return x;
}

/// Full Newton step by a dense solve of the unreduced system in the unknowns
/// (d_u, d_lambda, d_x, d_phi, d_psi):
///   K d_u + B d_x                  = res1
///   e^T d_x                        = res2
///   B^T d_u + e d_lambda + d_phi - d_psi = res3
///   Phi d_x + X d_phi              = res4
///   -Psi d_x + Xt d_psi            = res5
struct FullStep {
  Eigen::VectorXd du;
  double dlambda = 0.0;
  Eigen::VectorXd dx;
  Eigen::VectorXd dphi;
  Eigen::VectorXd dpsi;
};

inline FullStep full_newton_step(const SparseMatrix& k, const SparseMatrix& b,
                                 const topopt::IpmState& st, const topopt::ResidualBundle& bundle,
                                 double upper_bound) {
  const Eigen::Index n = k.rows();
  const Eigen::Index m = b.cols();
  const Eigen::Index size = n + 1 + 3 * m;
  const Eigen::Index l = n;
  const Eigen::Index ix = n + 1;
  const Eigen::Index iphi = ix + m;
  const Eigen::Index ipsi = iphi + m;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(size, size);
  Eigen::VectorXd rhs(size);
  const Eigen::MatrixXd kd = dense(k);
  const Eigen::MatrixXd bd = dense(b);
  a.block(0, 0, n, n) = kd;
  a.block(0, ix, n, m) = bd;
  rhs.head(n) = vec(bundle.res1);
  a.block(l, ix, 1, m).setOnes();
  rhs[l] = bundle.res2;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double x = st.x[i];
    a.block(ix + i, 0, 1, n) = bd.col(i).transpose();
    a(ix + i, l) = 1.0;
    a(ix + i, iphi + i) = 1.0;
    a(ix + i, ipsi + i) = -1.0;
    rhs[ix + i] = bundle.res3[i];
    a(iphi + i, ix + i) = st.phi[i];
    a(iphi + i, iphi + i) = x;
    rhs[iphi + i] = bundle.res4[i];
    a(ipsi + i, ix + i) = -st.psi[i];
    a(ipsi + i, ipsi + i) = upper_bound - x;
    rhs[ipsi + i] = bundle.res5[i];
  }
  const Eigen::VectorXd sol = a.fullPivLu().solve(rhs);
  return {sol.head(n), sol[l], sol.segment(ix, m), sol.segment(iphi, m), sol.segment(ipsi, m)};
}

/// Random strictly interior IP state for a problem with the given sizes.
inline topopt::IpmState random_interior_state(std::mt19937_64& rng, Index n, Index m,
                                              double upper_bound) {
  topopt::IpmState st;
  st.u = random_vector(rng, static_cast<std::size_t>(n));
  st.x = random_vector(rng, static_cast<std::size_t>(m), 0.1 * upper_bound, 0.9 * upper_bound);
  st.phi = random_vector(rng, static_cast<std::size_t>(m), 0.2, 2.0);
  st.psi = random_vector(rng, static_cast<std::size_t>(m), 0.2, 2.0);
  std::uniform_real_distribution<double> dist(0.05, 1.0);
  st.lambda = dist(rng);
  st.s = dist(rng);
  st.r = dist(rng);
  return st;
}

}  // namespace oracle
