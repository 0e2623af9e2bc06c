#include "poroflow/linsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <fmt/format.h>

namespace poroflow {

SparseMatrix SaddleSystem::assemble() const {
  const int nu = n_u();
  const int nq = n_q();
  const int np = n_p();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(Mbar.nonZeros() + 2 * Mf.nonZeros() + Abar.nonZeros() + 2 * Qbar.nonZeros() + 2 * Bbar.nonZeros());
  const auto put = [&t](const SparseMatrix& block, int r0, int c0, double scale, bool transpose) {
    for (int k = 0; k < block.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(block, k); it; ++it) {
        const int r = static_cast<int>(transpose ? it.col() : it.row());
        const int c = static_cast<int>(transpose ? it.row() : it.col());
        t.emplace_back(r0 + r, c0 + c, scale * it.value());
      }
    }
  };
  put(Mbar, 0, 0, 1.0, false);
  if (nq > 0) {
    put(Mf, 0, nu, 1.0, false);
    put(Mf, nu, 0, 1.0, true);
    put(Abar, nu, nu, 1.0, false);
  }
  if (np > 0) {
    put(Qbar, 0, nu + nq, -1.0, false);
    put(Qbar, nu + nq, 0, -1.0, true);
    if (nq > 0) {
      put(Bbar, nu, nu + nq, -1.0, false);
      put(Bbar, nu + nq, nu, -1.0, true);
    }
  }
  SparseMatrix out(nu + nq + np, nu + nq + np);
  out.setFromTriplets(t.begin(), t.end());
  out.makeCompressed();
  return out;
}

struct Factorization::Impl {
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  Vector scale;
};

Factorization::~Factorization() = default;
Factorization::Factorization(Factorization&&) noexcept = default;
Factorization& Factorization::operator=(Factorization&&) noexcept = default;

Factorization::Factorization(const SparseMatrix& matrix, std::string stage)
    : impl_(std::make_unique<Impl>()), n_(static_cast<int>(matrix.rows())) {
  if (matrix.rows() != matrix.cols()) throw NumericalError(stage, "matrix is not square");
  const int n = n_;
  if (n == 0) {
    pivot_ratio_ = 1.0;
    return;
  }

  Vector diag = Vector::Zero(n);
  for (int k = 0; k < matrix.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(matrix, k); it; ++it) {
      if (it.row() == it.col()) diag[it.row()] = it.value();
    }
  }
  Vector& d = impl_->scale;
  d = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (diag[i] != 0.0) d[i] = 1.0 / std::sqrt(std::abs(diag[i]));
  }
  // Multiplier rows: approximate Schur diagonal sum_k a_ki^2 / |a_kk|.
  Vector schur = Vector::Zero(n);
  for (int k = 0; k < matrix.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(matrix, k); it; ++it) {
      const auto r = it.row();
      const auto c = it.col();
      if (diag[c] == 0.0 && diag[r] != 0.0) schur[c] += it.value() * it.value() / std::abs(diag[r]);
    }
  }
  for (int i = 0; i < n; ++i) {
    if (diag[i] == 0.0 && schur[i] > 0.0) d[i] = 1.0 / std::sqrt(schur[i]);
  }
  // Zero-diagonal rows coupled only to other zero-diagonal rows (massless
  // unknowns against multipliers): scale the largest entry to one.
  Vector largest = Vector::Zero(n);
  for (int k = 0; k < matrix.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(matrix, k); it; ++it) {
      if (d[it.row()] > 0.0) largest[it.col()] = std::max(largest[it.col()], std::abs(it.value()) * d[it.row()]);
    }
  }
  for (int i = 0; i < n; ++i) {
    if (d[i] > 0.0) continue;
    if (!(largest[i] > 0.0)) {
      throw SingularMatrixError(stage, i, 0.0, fmt::format("structurally singular: unknown {} is uncoupled", i));
    }
    d[i] = 1.0 / largest[i];
  }

  SparseMatrix scaled = d.asDiagonal() * matrix * d.asDiagonal();
  scaled.makeCompressed();

  auto& lu = impl_->lu;
  lu.analyzePattern(scaled);
  lu.factorize(scaled);
  // Factor column j corresponds to original unknown perm_c^{-1}(j).
  const auto original = [&lu, n](int j) {
    const auto& pc = lu.colsPermutation();
    for (int i = 0; i < n; ++i) {
      if (pc.indices()[i] == j) return i;
    }
    return j;
  };
  if (lu.info() != Eigen::Success) {
    // SparseLU reports an exactly zero pivot as "... ZERO COLUMN AT <j + 1>".
    const std::string msg = lu.lastErrorMessage();
    const auto at = msg.rfind(' ');
    int dof = -1;
    if (msg.find("ZERO COLUMN") != std::string::npos && at != std::string::npos) {
      dof = original(std::stoi(msg.substr(at + 1)) - 1);
    }
    throw SingularMatrixError(stage, dof, 0.0, fmt::format("zero pivot at unknown {}: {}", dof, msg));
  }

  // Diagonal of U lives in the supernodal L storage.
  double umax = 0.0;
  double umin = std::numeric_limits<double>::infinity();
  int jmin = -1;
  const auto& L = lu.matrixL().m_mapL;
  for (int j = 0; j < n; ++j) {
    double pivot = 0.0;
    for (typename std::decay_t<decltype(L)>::InnerIterator it(L, j); it; ++it) {
      if (it.row() == j) {
        pivot = std::abs(it.value());
        break;
      }
    }
    umax = std::max(umax, pivot);
    if (pivot < umin) {
      umin = pivot;
      jmin = j;
    }
  }
  pivot_ratio_ = umax > 0.0 ? umin / umax : 0.0;
  if (pivot_ratio_ < singular_pivot_ratio) {
    const int dof = original(jmin);
    throw SingularMatrixError(stage, dof, pivot_ratio_,
                              fmt::format("near-singular pivot (ratio {:.3e}) at unknown {}", pivot_ratio_, dof));
  }
}

Vector Factorization::solve(const Vector& rhs) const {
  if (n_ == 0) return Vector::Zero(0);
  const Vector& d = impl_->scale;
  Vector y = impl_->lu.solve(d.cwiseProduct(rhs));
  return d.cwiseProduct(y);
}

Factorization factor(const SaddleSystem& sys, std::string stage) {
  return Factorization(sys.assemble(), std::move(stage));
}

double relative_residual(const SparseMatrix& matrix, const Vector& x, const Vector& rhs) {
  const double denom = matrix.norm() * x.norm() + rhs.norm();
  if (denom == 0.0) return 0.0;
  return (matrix * x - rhs).norm() / denom;
}

struct SpdFactorization::Impl {
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
};

SpdFactorization::~SpdFactorization() = default;
SpdFactorization::SpdFactorization(SpdFactorization&&) noexcept = default;
SpdFactorization& SpdFactorization::operator=(SpdFactorization&&) noexcept = default;

SpdFactorization::SpdFactorization(const SparseMatrix& matrix) : impl_(std::make_unique<Impl>()) {
  impl_->ldlt.compute(matrix);
  if (impl_->ldlt.info() != Eigen::Success) throw NumericalError("spd", "matrix is not positive definite");
  if ((impl_->ldlt.vectorD().array() <= 0.0).any()) {
    throw NumericalError("spd", "matrix is not positive definite");
  }
}

Eigen::MatrixXd SpdFactorization::solve(const Eigen::MatrixXd& rhs) const { return impl_->ldlt.solve(rhs); }

}  // namespace poroflow
