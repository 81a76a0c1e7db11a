#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "themis/adapters.hpp"
#include "themis/embedding_store.hpp"
#include "themis/error.hpp"

#ifdef THEMIS_HAVE_LAPACKE
#include <lapacke.h>
#endif

namespace themis::adapt {

namespace {

using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

RowMajorMap view(const sim::SimilarityMatrix& s) {
  const auto m = static_cast<Eigen::Index>(s.size());
  return RowMajorMap(s.entries().data(), m, m);
}

// Orthogonalises the columns of `block` against `basis` (and each other) with
// two passes of classical Gram-Schmidt. Columns that collapse are dropped.
Eigen::MatrixXd orthogonalize(const Eigen::MatrixXd& basis, Eigen::MatrixXd block) {
  Eigen::MatrixXd out(block.rows(), 0);
  for (Eigen::Index c = 0; c < block.cols(); ++c) {
    Eigen::VectorXd v = block.col(c);
    const double before = v.norm();
    if (before == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      if (basis.cols() > 0) v -= basis * (basis.transpose() * v);
      if (out.cols() > 0) v -= out * (out.transpose() * v);
    }
    const double after = v.norm();
    if (after <= 1e-10 * before) continue;
    out.conservativeResize(Eigen::NoChange, out.cols() + 1);
    out.col(out.cols() - 1) = v / after;
  }
  return out;
}

void append(Eigen::MatrixXd& dst, const Eigen::MatrixXd& cols) {
  const auto old = dst.cols();
  dst.conservativeResize(Eigen::NoChange, old + cols.cols());
  dst.rightCols(cols.cols()) = cols;
}

EigenDecomposition top_of(const EigenDecomposition& full, std::size_t count) {
  const auto c = static_cast<Eigen::Index>(count);
  return {full.values.tail(c), full.vectors.rightCols(c)};
}

#ifdef THEMIS_HAVE_LAPACKE
// Householder reduction to tridiagonal form, MRRR on the tridiagonal for
// eigenpairs first..last (1-based, ascending), then back-transformation.
EigenDecomposition tridiagonal_solve(const sim::SimilarityMatrix& s, lapack_int first, lapack_int last) {
  const auto n = static_cast<lapack_int>(s.size());
  const Eigen::Tridiagonalization<Eigen::MatrixXd> tri(to_eigen(s));
  Eigen::VectorXd d = tri.diagonal();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e.head(n - 1) = tri.subDiagonal();

  const lapack_int want = last - first + 1;
  Eigen::VectorXd w(n);
  Eigen::MatrixXd z(n, want);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(want));
  lapack_int found = 0;
  lapack_logical tryrac = 1;
  const auto info = LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0, 0.0, first, last, &found,
                                   w.data(), z.data(), n, want, support.data(), &tryrac);
  if (info != 0 || found != want) {
    throw Error(ErrorCode::EigensolveFailure, "dstemr returned " + std::to_string(info) + " on batch " +
                                                  std::to_string(s.batch_index));
  }
  EigenDecomposition out;
  out.values = w.head(want);
  out.vectors = tri.matrixQ() * z;
  return out;
}
#endif

}  // namespace

Eigen::MatrixXd to_eigen(const sim::SimilarityMatrix& s) { return view(s); }

std::string dense_backend() {
#ifdef THEMIS_HAVE_LAPACKE
  return "eigen+lapack-dstemr";
#else
  return "eigen";
#endif
}

EigenDecomposition decompose_full(const sim::SimilarityMatrix& s) {
  if (s.size() == 0) return {};
#ifdef THEMIS_HAVE_LAPACKE
  return tridiagonal_solve(s, 1, static_cast<lapack_int>(s.size()));
#else
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_eigen(s));
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::EigensolveFailure, "symmetric eigensolver did not converge on batch " +
                                                  std::to_string(s.batch_index));
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
#endif
}

EigenDecomposition decompose_largest(const sim::SimilarityMatrix& s, std::size_t count) {
  const std::size_t m = s.size();
  if (count == 0 || count > m) {
    throw Error(ErrorCode::InvalidParameter,
                "requested " + std::to_string(count) + " eigenpairs of a " + std::to_string(m) + "-row matrix");
  }
#ifdef THEMIS_HAVE_LAPACKE
  const auto n = static_cast<lapack_int>(m);
  return tridiagonal_solve(s, n - static_cast<lapack_int>(count) + 1, n);
#else
  return top_of(decompose_full(s), count);
#endif
}

EigenDecomposition decompose_top(const sim::SimilarityMatrix& s, std::size_t count, double tolerance,
                                 std::size_t max_iterations) {
  const std::size_t m = s.size();
  if (count == 0 || count > m) {
    throw Error(ErrorCode::InvalidParameter,
                "requested " + std::to_string(count) + " eigenpairs of a " + std::to_string(m) + "-row matrix");
  }
  const std::size_t block = std::min(m, count + std::max<std::size_t>(count, 8));
  const std::size_t max_basis = std::min(m, 4 * block);
  if (max_basis >= m || max_basis <= block) return top_of(decompose_full(s), count);

  const auto a = view(s);
  const auto rows = static_cast<Eigen::Index>(m);

  // Deterministic start block.
  Eigen::MatrixXd start(rows, static_cast<Eigen::Index>(block));
  for (Eigen::Index c = 0; c < start.cols(); ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      start(r, c) = embed::normal_at(0x7E1D5EEDULL, static_cast<std::uint64_t>(c * rows + r));
    }
  }
  Eigen::MatrixXd v = orthogonalize(Eigen::MatrixXd(rows, 0), start);
  Eigen::MatrixXd av = a * v;

  const auto wanted = static_cast<Eigen::Index>(count);
  const auto keep = static_cast<Eigen::Index>(block);
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    Eigen::MatrixXd h = v.transpose() * av;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(h);
    if (small.info() != Eigen::Success) break;

    // Ritz pairs, largest first.
    const auto n = h.rows();
    const auto kept = std::min(keep, n);
    const Eigen::MatrixXd y = small.eigenvectors().rightCols(kept).rowwise().reverse();
    const Eigen::VectorXd theta = small.eigenvalues().tail(kept).reverse();
    Eigen::MatrixXd u = v * y;
    Eigen::MatrixXd au = av * y;
    Eigen::MatrixXd resid = au - u * theta.asDiagonal();

    const double scale = std::max(theta.cwiseAbs().maxCoeff(), 1e-300);
    bool converged = kept >= wanted;
    for (Eigen::Index c = 0; c < std::min(wanted, kept) && converged; ++c) {
      if (resid.col(c).norm() > tolerance * scale) converged = false;
    }
    if (converged) {
      EigenDecomposition out;
      out.values = theta.head(wanted).reverse();
      out.vectors = u.leftCols(wanted).rowwise().reverse();
      return out;
    }

    // Thick restart on the kept Ritz vectors, then grow a block Krylov basis
    // from their residuals.
    v = std::move(u);
    av = std::move(au);
    Eigen::MatrixXd next = orthogonalize(v, resid);
    if (next.cols() == 0) {
      Eigen::MatrixXd fresh(rows, keep);
      for (Eigen::Index c = 0; c < fresh.cols(); ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
          fresh(r, c) = embed::normal_at(0xF2E5ULL + iter, static_cast<std::uint64_t>(c * rows + r));
        }
      }
      next = orthogonalize(v, fresh);
      if (next.cols() == 0) break;
    }
    while (next.cols() > 0 && static_cast<std::size_t>(v.cols() + next.cols()) <= max_basis) {
      Eigen::MatrixXd anext = a * next;
      append(v, next);
      append(av, anext);
      next = orthogonalize(v, anext);
    }
  }
  throw Error(ErrorCode::EigensolveFailure, "iterative eigensolver did not reach tolerance on batch " +
                                                std::to_string(s.batch_index));
}

double reconstruction_error(const sim::SimilarityMatrix& s, const EigenDecomposition& eig) {
  const Eigen::MatrixXd a = to_eigen(s);
  const Eigen::MatrixXd rebuilt = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
  const double denom = a.norm();
  return denom == 0.0 ? (rebuilt.norm() == 0.0 ? 0.0 : 1.0) : (a - rebuilt).norm() / denom;
}

}  // namespace themis::adapt
