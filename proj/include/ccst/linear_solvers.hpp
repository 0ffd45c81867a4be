#pragma once

#include <algorithm>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseQR>
#include <Eigen/SparseLU>

#include "ccst/errors.hpp"

namespace ccst {

/// Cholesky factorization of a sparse symmetric positive definite matrix.
class SpdFactor {
 public:
  SpdFactor() = default;
  SpdFactor(const Eigen::SparseMatrix<double>& A, const std::string& name) { compute(A, name); }

  void compute(const Eigen::SparseMatrix<double>& A, const std::string& name) {
    llt_.compute(A);
    if (llt_.info() != Eigen::Success)
      throw SolverError("Cholesky factorization of " + name + " failed (matrix not positive definite)");
    n_ = A.rows();
  }

  template <class Rhs>
  [[nodiscard]] auto solve(const Rhs& b) const {
    return llt_.solve(b);
  }

  [[nodiscard]] Eigen::Index rows() const { return n_; }

 private:
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
  Eigen::Index n_ = 0;
};

/// Number of null modes of a square sparse matrix, from a rank-revealing QR.
inline Eigen::Index null_mode_count(const Eigen::SparseMatrix<double>& A) {
  Eigen::SparseMatrix<double> Ac = A;
  Ac.makeCompressed();
  Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr;
  qr.setPivotThreshold(1e-10 * std::max(1.0, Ac.coeffs().cwiseAbs().maxCoeff()));
  qr.compute(Ac);
  if (qr.info() != Eigen::Success) return -1;
  return Ac.cols() - qr.rank();
}

/// Direct sparse LU (COLAMD ordering, partial pivoting) for the symmetric indefinite saddle matrices.
class SaddleFactor {
 public:
  SaddleFactor() = default;
  SaddleFactor(const Eigen::SparseMatrix<double>& A, const std::string& name) { compute(A, name); }

  void compute(const Eigen::SparseMatrix<double>& A, const std::string& name) {
    A_ = A;
    A_.makeCompressed();
    lu_.compute(A_);
    if (lu_.info() != Eigen::Success) {
      const auto nulls = null_mode_count(A_);
      throw SolverError("factorization of " + name + " failed: matrix is singular with " +
                        std::to_string(nulls) + " null mode(s)");
    }
  }

  template <class Rhs>
  [[nodiscard]] Eigen::MatrixXd solve(const Rhs& b) const {
    Eigen::MatrixXd x = lu_.solve(b);
    if (!x.allFinite()) {
      const auto nulls = null_mode_count(A_);
      throw SolverError("solve failed: matrix is singular with " + std::to_string(nulls) + " null mode(s)");
    }
    return x;
  }

 private:
  Eigen::SparseMatrix<double> A_;
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
};

}  // namespace ccst
