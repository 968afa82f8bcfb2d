#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace porefrac {

using Vec = Eigen::VectorXd;

/// Compressed sparse row matrix, square, with sorted column indices per row.
class CsrMatrix {
 public:
  CsrMatrix() = default;

  /// Build from a sparsity pattern given as per-row sorted unique column lists.
  static CsrMatrix from_pattern(const std::vector<std::vector<int>>& rows);

  int n() const { return static_cast<int>(row_ptr_.size()) - 1; }
  std::size_t nnz() const { return vals_.size(); }

  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& cols() const { return cols_; }
  const std::vector<double>& vals() const { return vals_; }
  std::vector<double>& vals() { return vals_; }

  void set_zero();

  /// Entry accessor; (i,j) must be in the pattern.
  double& at(int i, int j);
  double at(int i, int j) const;
  /// Adds into (i,j); ignores values outside the pattern only if add_must_exist
  /// was relaxed -- by default out-of-pattern insertion is a logic error.
  void add(int i, int j, double v) { at(i, j) += v; }
  bool has(int i, int j) const;

  double diag(int i) const { return at(i, i); }

  Vec multiply(const Vec& x) const;

  /// Row-wise zero of both row and column entries for the given dofs
  /// (symmetric elimination); diagonal set to one. Used with a matching rhs
  /// edit by apply_dirichlet in fem.hpp.
  void eliminate_symmetric(const std::vector<int>& dofs, const std::vector<char>& mask);

  Eigen::MatrixXd to_dense() const;

 private:
  std::vector<int> row_ptr_{0};
  std::vector<int> cols_;
  std::vector<double> vals_;
};

/// MatrixMarket coordinate-format export, for offline inspection of
/// assembled systems (debug flag in the CLI).
void write_matrix_market(const CsrMatrix& a, const std::string& path);

}  // namespace porefrac
