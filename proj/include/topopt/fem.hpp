#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "topopt/sparse.hpp"

namespace topopt {

/// Nodes whose two displacement components are both fixed.
enum class Support {
  left_edge,       ///< every node with x = 0
  bottom_corners,  ///< the two end nodes of the lower edge
};

/// Node carrying the vertical load on the finest mesh. The load is spread as
/// (-1/2, -1, -1/2) over the node and its two neighbours along the boundary.
enum class LoadSite {
  right_middle,   ///< midpoint of the right edge
  bottom_middle,  ///< midpoint of the lower edge
};

enum class Model { vts, simp };
enum class FilterMetric { manhattan, euclidean };

struct SimpParams {
  double penalty = 3.0;
  double filter_radius = 2.0;  ///< in units of finest-level elements
  FilterMetric metric = FilterMetric::manhattan;
};

struct ProblemSpec {
  std::string name = "custom";
  int coarse_nx = 2;
  int coarse_ny = 2;
  int levels = 1;  ///< level 1 is the coarse mesh; each level halves the element size
  Support support = Support::left_edge;
  LoadSite load = LoadSite::right_middle;
  double volume = 0.0;
  double upper_bound = 2.0;
  double young = 1.0;
  double poisson = 0.3;
  Model model = Model::vts;
  SimpParams simp;

  int nx(int level) const { return coarse_nx << (level - 1); }
  int ny(int level) const { return coarse_ny << (level - 1); }
  int finest_elements() const { return nx(levels) * ny(levels); }

  /// Throws std::invalid_argument unless the problem is strictly feasible
  /// (0 < V < m * upper_bound) and the parameters are in range.
  void validate() const;
};

/// Named problem set-ups: "ex1" (2x2 cantilever), "ex2" (4x2 cantilever),
/// "ex3" (8x2 bridge supported at the lower corners), "ex4" (ex2 with the
/// SIMP model, upper bound 3 and a Manhattan filter of radius 2).
/// The volume defaults to the finest element count (mean density 1).
/// Throws std::invalid_argument("unknown preset ...").
ProblemSpec preset(std::string_view name, int levels);

/// Structured grid of unit-reference bilinear quadrilaterals.
///
/// Nodes are numbered column-major, node(i, j) = i * (ny + 1) + j with i along
/// x. Fixed dofs are eliminated; free dofs keep the node order. Elements are
/// numbered column-major too, element(i, j) = i * ny + j.
class Mesh {
 public:
  static constexpr Index kFixed = -1;

  Mesh(int nx, int ny, Support support);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  Index num_elements() const { return static_cast<Index>(nx_) * ny_; }
  Index num_nodes() const { return static_cast<Index>(nx_ + 1) * (ny_ + 1); }
  Index num_dofs() const { return num_dofs_; }
  Support support() const { return support_; }

  Index node(int i, int j) const { return static_cast<Index>(i) * (ny_ + 1) + j; }
  Index element(int i, int j) const { return static_cast<Index>(i) * ny_ + j; }

  /// Free-dof index of (node, component) or kFixed.
  Index dof(Index node, int component) const { return dof_of_[2 * node + component]; }
  bool node_fixed(Index node) const { return fixed_node_[node] != 0; }

  /// Local order: (i,j), (i+1,j), (i+1,j+1), (i,j+1); x then y per node.
  const std::array<Index, 8>& element_dofs(Index e) const { return element_dofs_[e]; }

  std::span<const Index> pattern_offsets() const { return pattern_offsets_; }
  std::span<const Index> pattern_cols() const { return pattern_cols_; }
  /// CSR slot of local entry (a, b) of element e, or kFixed.
  Index slot(Index e, int a, int b) const { return element_slots_[64 * e + 8 * a + b]; }

 private:
  int nx_;
  int ny_;
  Support support_;
  Index num_dofs_ = 0;
  std::vector<char> fixed_node_;
  std::vector<Index> dof_of_;
  std::vector<std::array<Index, 8>> element_dofs_;
  std::vector<Index> pattern_offsets_;
  std::vector<Index> pattern_cols_;
  std::vector<Index> element_slots_;
};

using ElementMatrix = std::array<double, 64>;

/// Plane-stress stiffness of the unit square bilinear element (row-major,
/// unit thickness). Symmetric PSD of rank 5.
ElementMatrix element_stiffness(double young, double poisson);

/// K = sum_e weights[e] K_e restricted to the free dofs.
SparseMatrix assemble_stiffness(const Mesh& mesh, const ElementMatrix& ke,
                                std::span<const double> weights);

Vector assemble_load(const Mesh& mesh, const ProblemSpec& spec);

/// g_e = u^T K_e u
Vector element_energies(const Mesh& mesh, const ElementMatrix& ke, std::span<const double> u);

/// n x m matrix whose column e is K_e u.
SparseMatrix assemble_B(const Mesh& mesh, const ElementMatrix& ke, std::span<const double> u);

/// 1/2 f^T u
double compliance(std::span<const double> f, std::span<const double> u);

/// Everything the solvers need about one discretized problem: meshes for all
/// levels (index 0 is the coarsest), the element matrix and the load.
struct FeProblem {
  ProblemSpec spec;
  std::vector<Mesh> meshes;
  ElementMatrix ke{};
  Vector load;

  static FeProblem build(const ProblemSpec& spec);

  const Mesh& finest() const { return meshes.back(); }
  Index num_elements() const { return finest().num_elements(); }
  Index num_dofs() const { return finest().num_dofs(); }
};

}  // namespace topopt
