#include "porefrac/csr.hpp"

#include <algorithm>
#include <cassert>
#include <cstdio>
#include <stdexcept>

#include "porefrac/errors.hpp"

namespace porefrac {

CsrMatrix CsrMatrix::from_pattern(const std::vector<std::vector<int>>& rows) {
  CsrMatrix m;
  const int n = static_cast<int>(rows.size());
  if (n == 0) throw ConfigError("empty sparsity pattern");
  m.row_ptr_.assign(n + 1, 0);
  std::size_t nnz = 0;
  for (int i = 0; i < n; ++i) nnz += rows[i].size();
  m.cols_.reserve(nnz);
  for (int i = 0; i < n; ++i) {
    assert(std::is_sorted(rows[i].begin(), rows[i].end()));
    m.cols_.insert(m.cols_.end(), rows[i].begin(), rows[i].end());
    m.row_ptr_[i + 1] = static_cast<int>(m.cols_.size());
  }
  m.vals_.assign(m.cols_.size(), 0.0);
  return m;
}

void CsrMatrix::set_zero() { std::fill(vals_.begin(), vals_.end(), 0.0); }

double& CsrMatrix::at(int i, int j) {
  auto first = cols_.begin() + row_ptr_[i];
  auto last = cols_.begin() + row_ptr_[i + 1];
  auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) throw std::logic_error("CsrMatrix: entry outside pattern");
  return vals_[static_cast<std::size_t>(it - cols_.begin())];
}

double CsrMatrix::at(int i, int j) const {
  auto first = cols_.begin() + row_ptr_[i];
  auto last = cols_.begin() + row_ptr_[i + 1];
  auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return vals_[static_cast<std::size_t>(it - cols_.begin())];
}

bool CsrMatrix::has(int i, int j) const {
  auto first = cols_.begin() + row_ptr_[i];
  auto last = cols_.begin() + row_ptr_[i + 1];
  return std::binary_search(first, last, j);
}

Vec CsrMatrix::multiply(const Vec& x) const {
  Vec y(n());
  for (int i = 0; i < n(); ++i) {
    double s = 0;
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += vals_[k] * x[cols_[k]];
    y[i] = s;
  }
  return y;
}

void CsrMatrix::eliminate_symmetric(const std::vector<int>& dofs,
                                    const std::vector<char>& mask) {
  for (int i = 0; i < n(); ++i) {
    const bool row_fixed = mask[i];
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const int j = cols_[k];
      if (row_fixed || mask[j]) vals_[k] = (i == j && row_fixed) ? 1.0 : (i == j ? vals_[k] : 0.0);
    }
  }
  (void)dofs;
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n(), n());
  for (int i = 0; i < n(); ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) d(i, cols_[k]) = vals_[k];
  return d;
}

void write_matrix_market(const CsrMatrix& a, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("cannot open " + path);
  std::fprintf(f, "%%%%MatrixMarket matrix coordinate real general\n");
  std::fprintf(f, "%d %d %zu\n", a.n(), a.n(), a.nnz());
  for (int i = 0; i < a.n(); ++i)
    for (int k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k)
      std::fprintf(f, "%d %d %.17g\n", i + 1, a.cols()[k] + 1, a.vals()[k]);
  std::fclose(f);
}

}  // namespace porefrac
