#pragma once

#include <memory>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "poroflow/errors.hpp"

namespace poroflow {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Blocks of the symmetric saddle system
///
///   [ Mbar   Mf    -Qbar ] [ v ]   [ P ]
///   [ Mf^T   Abar  -Bbar ] [ q ] = [ F ]
///   [-Qbar^T -Bbar^T  0  ] [ p ]   [ 0 ]
///
/// Any of the q/p blocks may be empty (pure elastodynamics, incompressible elasticity).
struct SaddleSystem {
  SparseMatrix Mbar;
  SparseMatrix Mf;
  SparseMatrix Abar;
  SparseMatrix Qbar;
  SparseMatrix Bbar;

  int n_u() const { return static_cast<int>(Mbar.rows()); }
  int n_q() const { return static_cast<int>(Abar.rows()); }
  int n_p() const { return static_cast<int>(Qbar.cols()); }
  int size() const { return n_u() + n_q() + n_p(); }

  SparseMatrix assemble() const;
};

/// Thrown when a pivot falls below the singularity threshold. `dof()` is the
/// index (in the unknown vector) of the column that produced it.
class SingularMatrixError : public NumericalError {
 public:
  SingularMatrixError(const std::string& stage, int dof, double ratio, const std::string& what)
      : NumericalError(stage, what), dof_(dof), ratio_(ratio) {}

  int dof() const { return dof_; }
  double pivot_ratio() const { return ratio_; }

 private:
  int dof_;
  double ratio_;
};

/// Relative pivot size below which a factorization is declared singular.
inline constexpr double singular_pivot_ratio = 1e-12;

/// Direct factorization of a symmetric (possibly indefinite) sparse matrix.
///
/// The matrix is symmetrically equilibrated first: rows with a nonzero
/// diagonal are scaled by |a_ii|^-1/2, zero-diagonal (multiplier) rows by the
/// inverse root of their approximate Schur-complement diagonal. The pivot test
/// is applied to the LU factors of the equilibrated matrix.
class Factorization {
 public:
  explicit Factorization(const SparseMatrix& matrix, std::string stage = "solve");
  ~Factorization();
  Factorization(Factorization&&) noexcept;
  Factorization& operator=(Factorization&&) noexcept;

  Vector solve(const Vector& rhs) const;

  int size() const { return n_; }
  /// min |U_jj| / max |U_jj| of the equilibrated factors.
  double pivot_ratio() const { return pivot_ratio_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int n_ = 0;
  double pivot_ratio_ = 0.0;
};

Factorization factor(const SaddleSystem& sys, std::string stage = "solve");

/// Relative residual ||A x - b|| / (||A|| ||x|| + ||b||), Frobenius norm for A.
double relative_residual(const SparseMatrix& matrix, const Vector& x, const Vector& rhs);

/// Sparse Cholesky-type solve for symmetric positive definite matrices.
class SpdFactorization {
 public:
  explicit SpdFactorization(const SparseMatrix& matrix);
  ~SpdFactorization();
  SpdFactorization(SpdFactorization&&) noexcept;
  SpdFactorization& operator=(SpdFactorization&&) noexcept;

  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace poroflow
