#include "topopt/fem.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "topopt/kernels.hpp"

namespace topopt {

void ProblemSpec::validate() const {
  if (coarse_nx < 1 || coarse_ny < 1) throw std::invalid_argument("coarse mesh must have elements");
  if (levels < 1) throw std::invalid_argument("levels must be >= 1");
  if (levels > 16) throw std::invalid_argument("levels too large");
  if (!(young > 0.0)) throw std::invalid_argument("Young's modulus must be positive");
  if (!(poisson >= 0.0 && poisson < 0.5)) throw std::invalid_argument("Poisson ratio must be in [0, 0.5)");
  if (!(upper_bound > 0.0)) throw std::invalid_argument("upper bound must be positive");
  const double m = finest_elements();
  if (!(volume > 0.0 && volume < m * upper_bound)) {
    throw std::invalid_argument("problem not strictly feasible: need 0 < V < m * upper_bound");
  }
  if (model == Model::simp) {
    if (!(simp.penalty >= 1.0)) throw std::invalid_argument("SIMP penalty must be >= 1");
    if (!(simp.filter_radius > 0.0)) throw std::invalid_argument("filter radius must be positive");
  }
}

ProblemSpec preset(std::string_view name, int levels) {
  ProblemSpec spec;
  spec.name = std::string(name);
  spec.levels = levels;
  if (name == "ex1") {
    spec.coarse_nx = 2;
    spec.coarse_ny = 2;
  } else if (name == "ex2" || name == "ex4") {
    spec.coarse_nx = 4;
    spec.coarse_ny = 2;
  } else if (name == "ex3") {
    spec.coarse_nx = 8;
    spec.coarse_ny = 2;
    spec.support = Support::bottom_corners;
    spec.load = LoadSite::bottom_middle;
  } else {
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
  }
  if (name == "ex4") {
    spec.model = Model::simp;
    spec.upper_bound = 3.0;
    spec.simp = SimpParams{3.0, 2.0, FilterMetric::manhattan};
  }
  if (levels >= 1 && levels <= 16) spec.volume = static_cast<double>(spec.finest_elements());
  return spec;
}

Mesh::Mesh(int nx, int ny, Support support) : nx_(nx), ny_(ny), support_(support) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("mesh needs at least one element");
  fixed_node_.assign(num_nodes(), 0);
  switch (support) {
    case Support::left_edge:
      for (int j = 0; j <= ny; ++j) fixed_node_[node(0, j)] = 1;
      break;
    case Support::bottom_corners:
      fixed_node_[node(0, 0)] = 1;
      fixed_node_[node(nx, 0)] = 1;
      break;
  }
  dof_of_.assign(2 * static_cast<std::size_t>(num_nodes()), kFixed);
  for (Index v = 0; v < num_nodes(); ++v) {
    if (fixed_node_[v]) continue;
    dof_of_[2 * v] = num_dofs_++;
    dof_of_[2 * v + 1] = num_dofs_++;
  }

  element_dofs_.resize(num_elements());
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const Index corners[4] = {node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)};
      auto& dofs = element_dofs_[element(i, j)];
      for (int a = 0; a < 4; ++a) {
        dofs[2 * a] = dof(corners[a], 0);
        dofs[2 * a + 1] = dof(corners[a], 1);
      }
    }
  }

  // Assembly plan: sparsity of sum_e K_e and the CSR slot of each element entry.
  std::vector<std::vector<Index>> rows(num_dofs_);
  for (const auto& dofs : element_dofs_) {
    for (Index r : dofs) {
      if (r == kFixed) continue;
      for (Index c : dofs) {
        if (c != kFixed) rows[r].push_back(c);
      }
    }
  }
  pattern_offsets_.assign(static_cast<std::size_t>(num_dofs_) + 1, 0);
  for (Index r = 0; r < num_dofs_; ++r) {
    auto& row = rows[r];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    pattern_offsets_[r + 1] = pattern_offsets_[r] + static_cast<Index>(row.size());
  }
  pattern_cols_.reserve(pattern_offsets_.back());
  for (const auto& row : rows) pattern_cols_.insert(pattern_cols_.end(), row.begin(), row.end());

  element_slots_.assign(64 * static_cast<std::size_t>(num_elements()), kFixed);
  for (Index e = 0; e < num_elements(); ++e) {
    const auto& dofs = element_dofs_[e];
    for (int a = 0; a < 8; ++a) {
      if (dofs[a] == kFixed) continue;
      const auto begin = pattern_cols_.begin() + pattern_offsets_[dofs[a]];
      const auto end = pattern_cols_.begin() + pattern_offsets_[dofs[a] + 1];
      for (int b = 0; b < 8; ++b) {
        if (dofs[b] == kFixed) continue;
        element_slots_[64 * e + 8 * a + b] =
            static_cast<Index>(std::lower_bound(begin, end, dofs[b]) - pattern_cols_.begin());
      }
    }
  }
}

ElementMatrix element_stiffness(double young, double poisson) {
  const double nu = poisson;
  const double k[8] = {0.5 - nu / 6.0,        0.125 + nu / 8.0, -0.25 - nu / 12.0,
                       -0.125 + 3.0 * nu / 8.0, -0.25 + nu / 12.0, -0.125 - nu / 8.0,
                       nu / 6.0,                0.125 - 3.0 * nu / 8.0};
  // Entry pattern of the closed-form integral, 0-based indices into k.
  static constexpr int pattern[8][8] = {
      {0, 1, 2, 3, 4, 5, 6, 7}, {1, 0, 7, 6, 5, 4, 3, 2}, {2, 7, 0, 5, 6, 3, 4, 1},
      {3, 6, 5, 0, 7, 2, 1, 4}, {4, 5, 6, 7, 0, 1, 2, 3}, {5, 4, 3, 2, 1, 0, 7, 6},
      {6, 3, 4, 1, 2, 7, 0, 5}, {7, 2, 1, 4, 3, 6, 5, 0}};
  const double scale = young / (1.0 - nu * nu);
  ElementMatrix ke{};
  for (int a = 0; a < 8; ++a) {
    for (int b = 0; b < 8; ++b) ke[8 * a + b] = scale * k[pattern[a][b]];
  }
  return ke;
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const ElementMatrix& ke,
                                std::span<const double> weights) {
  if (static_cast<Index>(weights.size()) != mesh.num_elements()) {
    throw std::invalid_argument("assemble_stiffness: one weight per element required");
  }
  Vector values(mesh.pattern_cols().size(), 0.0);
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const double w = weights[e];
    if (w == 0.0) continue;
    for (int a = 0; a < 8; ++a) {
      for (int b = 0; b < 8; ++b) {
        const Index s = mesh.slot(e, a, b);
        if (s != Mesh::kFixed) values[s] += w * ke[8 * a + b];
      }
    }
  }
  return SparseMatrix(mesh.num_dofs(), mesh.num_dofs(),
                      {mesh.pattern_offsets().begin(), mesh.pattern_offsets().end()},
                      {mesh.pattern_cols().begin(), mesh.pattern_cols().end()}, std::move(values));
}

Vector assemble_load(const Mesh& mesh, const ProblemSpec& spec) {
  Index centre = 0;
  Index neighbours[2] = {0, 0};
  switch (spec.load) {
    case LoadSite::right_middle: {
      if (mesh.ny() % 2 != 0 || mesh.ny() < 2) {
        throw std::invalid_argument("right_middle load needs an even number of rows");
      }
      const int j = mesh.ny() / 2;
      centre = mesh.node(mesh.nx(), j);
      neighbours[0] = mesh.node(mesh.nx(), j - 1);
      neighbours[1] = mesh.node(mesh.nx(), j + 1);
      break;
    }
    case LoadSite::bottom_middle: {
      if (mesh.nx() % 2 != 0 || mesh.nx() < 2) {
        throw std::invalid_argument("bottom_middle load needs an even number of columns");
      }
      const int i = mesh.nx() / 2;
      centre = mesh.node(i, 0);
      neighbours[0] = mesh.node(i - 1, 0);
      neighbours[1] = mesh.node(i + 1, 0);
      break;
    }
  }
  Vector f(mesh.num_dofs(), 0.0);
  auto put = [&](Index node, double value) {
    const Index d = mesh.dof(node, 1);
    if (d == Mesh::kFixed) throw std::invalid_argument("load applied to fixed dof");
    f[d] += value;
  };
  put(centre, -1.0);
  put(neighbours[0], -0.5);
  put(neighbours[1], -0.5);
  return f;
}

namespace {

std::array<double, 8> gather_element(const Mesh& mesh, Index e, std::span<const double> u) {
  std::array<double, 8> ue{};
  const auto& dofs = mesh.element_dofs(e);
  for (int a = 0; a < 8; ++a) ue[a] = dofs[a] == Mesh::kFixed ? 0.0 : u[dofs[a]];
  return ue;
}

}  // namespace

Vector element_energies(const Mesh& mesh, const ElementMatrix& ke, std::span<const double> u) {
  if (static_cast<Index>(u.size()) != mesh.num_dofs()) {
    throw std::invalid_argument("element_energies: displacement size mismatch");
  }
  Vector g(mesh.num_elements());
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const auto ue = gather_element(mesh, e, u);
    double s = 0.0;
    for (int a = 0; a < 8; ++a) {
      double row = 0.0;
      for (int b = 0; b < 8; ++b) row += ke[8 * a + b] * ue[b];
      s += ue[a] * row;
    }
    g[e] = s;
  }
  return g;
}

SparseMatrix assemble_B(const Mesh& mesh, const ElementMatrix& ke, std::span<const double> u) {
  if (static_cast<Index>(u.size()) != mesh.num_dofs()) {
    throw std::invalid_argument("assemble_B: displacement size mismatch");
  }
  // Build B^T row by row (one row per element), then transpose.
  const Index m = mesh.num_elements();
  std::vector<Index> offsets(static_cast<std::size_t>(m) + 1, 0);
  std::vector<Index> cols;
  Vector vals;
  cols.reserve(8 * static_cast<std::size_t>(m));
  vals.reserve(8 * static_cast<std::size_t>(m));
  std::array<std::pair<Index, double>, 8> entries{};
  for (Index e = 0; e < m; ++e) {
    const auto ue = gather_element(mesh, e, u);
    const auto& dofs = mesh.element_dofs(e);
    int count = 0;
    for (int a = 0; a < 8; ++a) {
      if (dofs[a] == Mesh::kFixed) continue;
      double row = 0.0;
      for (int b = 0; b < 8; ++b) row += ke[8 * a + b] * ue[b];
      entries[count++] = {dofs[a], row};
    }
    std::sort(entries.begin(), entries.begin() + count);
    for (int k = 0; k < count; ++k) {
      cols.push_back(entries[k].first);
      vals.push_back(entries[k].second);
    }
    offsets[e + 1] = static_cast<Index>(cols.size());
  }
  return transpose(SparseMatrix(m, mesh.num_dofs(), std::move(offsets), std::move(cols), std::move(vals)));
}

double compliance(std::span<const double> f, std::span<const double> u) {
  if (f.size() != u.size()) throw std::invalid_argument("compliance: size mismatch");
  return 0.5 * kernels::dot(f, u);
}

FeProblem FeProblem::build(const ProblemSpec& spec) {
  spec.validate();
  FeProblem p;
  p.spec = spec;
  p.meshes.reserve(spec.levels);
  for (int level = 1; level <= spec.levels; ++level) {
    p.meshes.emplace_back(spec.nx(level), spec.ny(level), spec.support);
  }
  p.ke = element_stiffness(spec.young, spec.poisson);
  p.load = assemble_load(p.finest(), spec);
  return p;
}

}  // namespace topopt
