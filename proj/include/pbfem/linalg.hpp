// Sparse matrices and direct solvers used by all assemblies and the Picard
// update. Storage and factorizations are backed by Eigen; assembly follows
// the usual begin/add/finalize pattern with summed duplicates.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace pbfem {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

class MatrixBuilder {
 public:
  MatrixBuilder(int rows, int cols) : rows_(rows), cols_(cols) {}

  void add(int i, int j, double v) {
    if (i < 0 || i >= rows_ || j < 0 || j >= cols_)
      throw std::out_of_range("MatrixBuilder::add: index out of bounds");
    trips_.emplace_back(i, j, v);
  }

  // Duplicate insertions are summed; column indices end up sorted per row.
  SpMat finalize() const {
    SpMat a(rows_, cols_);
    a.setFromTriplets(trips_.begin(), trips_.end());
    a.makeCompressed();
    return a;
  }

 private:
  int rows_, cols_;
  std::vector<Eigen::Triplet<double>> trips_;
};

inline Vec solve_direct(const SpMat& a, const Vec& b, double tol = 1e-12) {
  if (a.rows() != a.cols()) throw std::invalid_argument("solve_direct: matrix must be square");
  Eigen::SparseLU<SpMat> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "solve_direct: factorization failed (" << lu.lastErrorMessage() << ")";
    throw std::runtime_error(msg.str());
  }
  Vec x = lu.solve(b);
  const double bn = b.norm();
  if (bn > 0.0) {
    const double rel = (a * x - b).norm() / bn;
    if (rel > tol) {
      // One pass of iterative refinement; direct sparse LU normally lands
      // well below tol without it.
      x += lu.solve(b - a * x);
      const double rel2 = (a * x - b).norm() / bn;
      if (rel2 > tol) {
        std::ostringstream msg;
        msg << "solve_direct: residual " << rel2 << " above tolerance " << tol;
        throw std::runtime_error(msg.str());
      }
    }
  }
  return x;
}

// LU with a cached symbolic analysis, for matrices whose sparsity pattern is
// fixed while values change every Picard iteration. Supports transpose
// solves against the same factorization.
class CachedLU {
 public:
  void factorize(const SpMat& a) {
    if (!lu_) lu_ = std::make_unique<Eigen::SparseLU<SpMat>>();
    if (!analyzed_) {
      lu_->analyzePattern(a);
      analyzed_ = true;
    }
    lu_->factorize(a);
    if (lu_->info() != Eigen::Success)
      throw std::runtime_error("CachedLU: factorization failed (matrix may be singular)");
  }
  Vec solve(const Vec& b) const { return lu_->solve(b); }
  Vec solve_transpose(const Vec& b) const { return lu_->transpose().solve(b); }

 private:
  // behind unique_ptr: Eigen solvers are noncopyable, and transpose() is a
  // non-const accessor
  std::unique_ptr<Eigen::SparseLU<SpMat>> lu_;
  bool analyzed_ = false;
};

// Cholesky (LDLT) with cached analysis for SPD mass-type matrices.
class CachedLDLT {
 public:
  void factorize(const SpMat& a) {
    if (!ldlt_) ldlt_ = std::make_unique<Eigen::SimplicialLDLT<SpMat>>();
    if (!analyzed_) {
      ldlt_->analyzePattern(a);
      analyzed_ = true;
    }
    ldlt_->factorize(a);
    if (ldlt_->info() != Eigen::Success)
      throw std::runtime_error("CachedLDLT: factorization failed (matrix not SPD?)");
  }
  Vec solve(const Vec& b) const { return ldlt_->solve(b); }

 private:
  std::unique_ptr<Eigen::SimplicialLDLT<SpMat>> ldlt_;
  bool analyzed_ = false;
};

// 2x2 block system for the mixed (du, drho) Picard update.
struct BlockSystem {
  SpMat a_uu, a_ur, a_ru, a_rr;
  Vec b_u, b_r;
};

namespace detail {

inline SpMat concat_blocks(const BlockSystem& sys) {
  const int nu = static_cast<int>(sys.a_uu.rows());
  const int nr = static_cast<int>(sys.a_rr.rows());
  if (sys.a_ur.rows() != nu || sys.a_ru.rows() != nr || sys.a_ur.cols() != nr || sys.a_ru.cols() != nu)
    throw std::invalid_argument("solve_block: block shapes not conformal");
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(sys.a_uu.nonZeros() + sys.a_ur.nonZeros() + sys.a_ru.nonZeros() + sys.a_rr.nonZeros());
  auto append = [&trips](const SpMat& m, int r0, int c0) {
    for (int k = 0; k < m.outerSize(); ++k)
      for (SpMat::InnerIterator it(m, k); it; ++it)
        trips.emplace_back(static_cast<int>(it.row()) + r0, static_cast<int>(it.col()) + c0, it.value());
  };
  append(sys.a_uu, 0, 0);
  append(sys.a_ur, 0, nu);
  append(sys.a_ru, nu, 0);
  append(sys.a_rr, nu, nu);
  SpMat a(nu + nr, nu + nr);
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();
  return a;
}

}  // namespace detail

// One-shot monolithic solve of the concatenated block system.
inline std::pair<Vec, Vec> solve_block(const BlockSystem& sys, double tol = 1e-12) {
  const int nu = static_cast<int>(sys.a_uu.rows());
  const int nr = static_cast<int>(sys.a_rr.rows());
  const SpMat a = detail::concat_blocks(sys);
  Vec b(nu + nr);
  b.head(nu) = sys.b_u;
  b.tail(nr) = sys.b_r;
  const Vec x = solve_direct(a, b, tol);
  return {x.head(nu), x.tail(nr)};
}

// Retained factorization of a block system's matrix; the Picard iteration
// factorizes once per run and back-substitutes every iteration.
class BlockSolver {
 public:
  void factorize(const BlockSystem& sys) {
    nu_ = static_cast<int>(sys.a_uu.rows());
    nr_ = static_cast<int>(sys.a_rr.rows());
    a_ = detail::concat_blocks(sys);
    lu_.factorize(a_);
  }
  std::pair<Vec, Vec> solve(const Vec& b_u, const Vec& b_r, double tol = 1e-12) const {
    Vec b(nu_ + nr_);
    b.head(nu_) = b_u;
    b.tail(nr_) = b_r;
    Vec x = lu_.solve(b);
    const double bn = b.norm();
    if (bn > 0.0 && (a_ * x - b).norm() / bn > tol) x += lu_.solve(b - a_ * x);
    return {x.head(nu_), x.tail(nr_)};
  }

 private:
  int nu_ = 0, nr_ = 0;
  SpMat a_;
  CachedLU lu_;
};

}  // namespace pbfem
