#include "topopt/simp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace topopt {

FilterMatrix build_filter(const Mesh& mesh, double radius, FilterMetric metric) {
  if (!(radius > 0.0)) throw std::invalid_argument("filter radius must be positive");
  const int nx = mesh.nx();
  const int ny = mesh.ny();
  const int reach = static_cast<int>(std::ceil(radius));
  std::vector<Triplet> triplets;
  Vector column_sum(mesh.num_elements(), 0.0);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const Index col = mesh.element(i, j);
      for (int a = std::max(0, i - reach); a <= std::min(nx - 1, i + reach); ++a) {
        for (int b = std::max(0, j - reach); b <= std::min(ny - 1, j + reach); ++b) {
          const double di = a - i;
          const double dj = b - j;
          const double dist = metric == FilterMetric::manhattan ? std::abs(di) + std::abs(dj)
                                                                : std::hypot(di, dj);
          const double w = radius - dist;
          if (w <= 0.0) continue;
          triplets.push_back({mesh.element(a, b), col, w});
          column_sum[col] += w;
        }
      }
    }
  }
  for (auto& t : triplets) t.value /= column_sum[t.col];
  const Index m = mesh.num_elements();
  return {SparseMatrix::from_triplets(m, m, std::move(triplets)), radius, metric};
}

namespace {

Vector filtered_power(std::span<const double> x, const FilterMatrix& filter, double exponent,
                      double factor) {
  Vector xt = spmv(filter.w, x);
  for (double& v : xt) v = factor * std::pow(v, exponent);
  return xt;
}

void check_design(const Mesh& mesh, std::span<const double> x) {
  if (static_cast<Index>(x.size()) != mesh.num_elements()) {
    throw std::invalid_argument("design field size does not match mesh");
  }
}

}  // namespace

SparseMatrix simp_stiffness(const Mesh& mesh, const ElementMatrix& ke, std::span<const double> x,
                            const FilterMatrix& filter, double penalty) {
  check_design(mesh, x);
  return assemble_stiffness(mesh, ke, filtered_power(x, filter, penalty, 1.0));
}

SparseMatrix simp_B(const Mesh& mesh, const ElementMatrix& ke, std::span<const double> u,
                    std::span<const double> x, const FilterMatrix& filter, double penalty) {
  check_design(mesh, x);
  const Vector d = filtered_power(x, filter, penalty - 1.0, penalty);
  return multiply(scale_columns(assemble_B(mesh, ke, u), d), filter.w);
}

Vector simp_kkt_res3(const Mesh& mesh, const ElementMatrix& ke, std::span<const double> u,
                     std::span<const double> x, double lambda, std::span<const double> phi,
                     std::span<const double> psi, const FilterMatrix& filter, double penalty) {
  Vector res3 = spmv_transpose(simp_B(mesh, ke, u, x, filter, penalty), u);
  for (std::size_t i = 0; i < res3.size(); ++i) {
    res3[i] = -0.5 * res3[i] - lambda - phi[i] + psi[i];
  }
  return res3;
}

SparseMatrix SimpModel::stiffness(std::span<const double> x) const {
  return simp_stiffness(*mesh_, ke_, x, filter_, penalty_);
}

SparseMatrix SimpModel::sensitivity(std::span<const double> x, std::span<const double> u) const {
  return simp_B(*mesh_, ke_, u, x, filter_, penalty_);
}

SparseMatrix VtsModel::stiffness(std::span<const double> x) const {
  return assemble_stiffness(*mesh_, ke_, x);
}

SparseMatrix VtsModel::sensitivity(std::span<const double>, std::span<const double> u) const {
  return assemble_B(*mesh_, ke_, u);
}

std::unique_ptr<StiffnessModel> make_model(const FeProblem& problem) {
  const Mesh& mesh = problem.finest();
  if (problem.spec.model == Model::vts) return std::make_unique<VtsModel>(mesh, problem.ke);
  const SimpParams& p = problem.spec.simp;
  return std::make_unique<SimpModel>(mesh, problem.ke,
                                     build_filter(mesh, p.filter_radius, p.metric), p.penalty);
}

}  // namespace topopt
