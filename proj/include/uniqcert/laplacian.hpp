#ifndef UNIQCERT_LAPLACIAN_HPP
#define UNIQCERT_LAPLACIAN_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "uniqcert/errors.hpp"
#include "uniqcert/grid.hpp"
#include "uniqcert/operators.hpp"
#include "uniqcert/parallel.hpp"

namespace uniqcert {

/// Second-order central-difference Dirichlet Laplacian: 2m+1-point stencil,
/// diagonal sum(2/h_k^2), off-diagonals -1/h_k^2, boundary eliminated.
inline DiscreteOperator build_laplacian(const GridDomain& d) {
  DiscreteOperator A;
  A.domain = d;
  A.n = d.interior_count();
  const int m = d.dimension;

  double diag = 0.0;
  std::array<double, 3> off{};
  std::array<int, 3> stride{1, 1, 1};
  for (int k = 0; k < m; ++k) {
    const double inv_h2 = 1.0 / (d.spacing[k] * d.spacing[k]);
    diag += 2.0 * inv_h2;
    off[k] = -inv_h2;
    if (k > 0) stride[k] = stride[k - 1] * d.counts[k - 1];
  }

  A.row_ptr.assign(static_cast<std::size_t>(A.n) + 1, 0);
  A.cols.reserve(static_cast<std::size_t>(A.n) * (2 * m + 1));
  A.vals.reserve(static_cast<std::size_t>(A.n) * (2 * m + 1));
  A.diagonal.assign(static_cast<std::size_t>(A.n), diag);

  for (int i = 0; i < A.n; ++i) {
    const std::array<int, 3> idx = d.multi_index(i);
    // Columns ascend: minus neighbors from the largest stride, the
    // diagonal, then plus neighbors from the smallest stride.
    for (int k = m - 1; k >= 0; --k) {
      if (idx[k] > 0) {
        A.cols.push_back(i - stride[k]);
        A.vals.push_back(off[k]);
      }
    }
    A.cols.push_back(i);
    A.vals.push_back(diag);
    for (int k = 0; k < m; ++k) {
      if (idx[k] < d.counts[k] - 1) {
        A.cols.push_back(i + stride[k]);
        A.vals.push_back(off[k]);
      }
    }
    A.row_ptr[static_cast<std::size_t>(i) + 1] = static_cast<int>(A.cols.size());
  }
  return A;
}

/// Optimal discrete constant c with <Au,u>_h >= c ||u||_h^2.
inline double poincare_constant(const GridDomain& d, double tol = 1e-12) {
  return smallest_eigenvalue(build_laplacian(d), tol).value;
}

/// ||A^{-1} delta_i||_h for each requested node, where delta_i carries
/// 1/cellVolume at node i. Solves run concurrently, one per output slot.
inline std::vector<double> green_column_norms(const DiscreteOperator& A,
                                              const std::vector<int>& nodes,
                                              double cg_tol = 1e-12) {
  std::vector<double> norms(nodes.size(), 0.0);
  const double delta_value = 1.0 / A.domain.cell_volume();
  parallel_for(static_cast<int>(nodes.size()), [&](int j) {
    GridField rhs = GridField::zeros(A.domain);
    rhs.values[static_cast<std::size_t>(nodes[static_cast<std::size_t>(j)])] =
        delta_value;
    CgOptions opts;
    opts.diag = &A.diagonal;
    const GridField g = solve_spd(
        [&A](const GridField& v) { return A.apply(v); }, rhs, cg_tol, opts);
    norms[static_cast<std::size_t>(j)] = norm_h(g);
  });
  return norms;
}

namespace detail {

/// Nodes whose Green-column norms cover every symmetry orbit of the box:
/// per-axis reflection always holds; axes with equal count and spacing are
/// interchangeable, so their folded indices are sorted into one canonical
/// order. The maximum over these nodes equals the maximum over all nodes.
inline std::vector<int> embedding_orbit_representatives(const GridDomain& d) {
  const int m = d.dimension;
  std::vector<int> reps;
  const int n = d.interior_count();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    std::array<int, 3> idx = d.multi_index(i);
    for (int k = 0; k < m; ++k)
      idx[k] = std::min(idx[k], d.counts[k] - 1 - idx[k]);
    // Sort folded indices within groups of interchangeable axes.
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b)
        if (d.counts[a] == d.counts[b] && d.spacing[a] == d.spacing[b] &&
            idx[a] < idx[b])
          std::swap(idx[a], idx[b]);
    const int canon = d.flat_index(idx);
    if (!seen[static_cast<std::size_t>(canon)]) {
      seen[static_cast<std::size_t>(canon)] = 1;
      reps.push_back(canon);
    }
  }
  return reps;
}

}  // namespace detail

struct EmbeddingOptions {
  /// All orbits (exact constant) or a strided subset (lower bound).
  bool all = true;
  int stride = 4;
  double cg_tol = 1e-12;
};

struct EmbeddingResult {
  double value = 0.0;
  bool exact = true;
  int samples = 0;
  int argmax_node = 0;
};

/// Sharp discrete sup-norm embedding constant: ||u||_inf <= c ||Au||_h,
/// realized as the largest Green-column norm over the sampled nodes.
inline EmbeddingResult embedding_constant(const DiscreteOperator& A,
                                          const EmbeddingOptions& opts = {}) {
  std::vector<int> nodes;
  if (opts.all) {
    nodes = detail::embedding_orbit_representatives(A.domain);
  } else {
    const int n = A.domain.interior_count();
    const int stride = std::max(1, opts.stride);
    for (int i = 0; i < n; i += stride) nodes.push_back(i);
    // The center node dominates on symmetric boxes; always include it.
    std::array<int, 3> mid{0, 0, 0};
    for (int k = 0; k < A.domain.dimension; ++k)
      mid[k] = (A.domain.counts[k] - 1) / 2;
    const int center = A.domain.flat_index(mid);
    if (std::find(nodes.begin(), nodes.end(), center) == nodes.end())
      nodes.push_back(center);
  }

  const std::vector<double> norms = green_column_norms(A, nodes, opts.cg_tol);
  EmbeddingResult out;
  out.exact = opts.all;
  out.samples = static_cast<int>(nodes.size());
  for (std::size_t j = 0; j < norms.size(); ++j) {
    if (norms[j] > out.value) {
      out.value = norms[j];
      out.argmax_node = nodes[j];
    }
  }
  return out;
}

}  // namespace uniqcert

#endif  // UNIQCERT_LAPLACIAN_HPP
