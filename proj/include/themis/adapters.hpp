#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "themis/dataset_io.hpp"
#include "themis/similarity.hpp"

namespace themis::adapt {

enum class Adapter { Spectral, Lof, Mean, TrimmedTopK };

std::string to_string(Adapter adapter);
Adapter parse_adapter(const std::string& text);

enum class EigenSolver { Full, Iterative };

std::string to_string(EigenSolver solver);
EigenSolver parse_eigen_solver(const std::string& text);

struct SpectralParams {
  std::size_t k = 15;
};

struct LofParams {
  std::size_t neighbors = 10;
};

struct TrimmedParams {
  double alpha = 0.05;
  /// Number of largest surviving similarities averaged; unset means ceil(0.1 * (m - 1)).
  std::optional<std::size_t> top_k;
};

struct AdapterConfig {
  Adapter adapter = Adapter::Spectral;
  SpectralParams spectral;
  LofParams lof;
  TrimmedParams trimmed;
  EigenSolver solver = EigenSolver::Full;
};

/// Per-timestep scores for a whole series; pad positions already dropped.
struct ScoreSeries {
  std::vector<double> scores;
  AdapterConfig config;

  std::size_t size() const noexcept { return scores.size(); }
};

struct RowScores {
  std::vector<double> scores;
  /// Set when no direction carried information (max embedding norm below 1e-12,
  /// or no informative rows); all scores are then 0.
  bool degenerate = false;
};

// ---- eigen decomposition ----------------------------------------------------

/// Eigenpairs with eigenvalues in ascending order; column i of `vectors`
/// belongs to values[i]. A partial decomposition holds only the largest pairs.
struct EigenDecomposition {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

Eigen::MatrixXd to_eigen(const sim::SimilarityMatrix& s);

/// "eigen+lapack-dstemr" or "eigen", for run manifests.
std::string dense_backend();

/// Dense symmetric solve of the full spectrum.
EigenDecomposition decompose_full(const sim::SimilarityMatrix& s);

/// The largest `count` eigenpairs from the same dense reduction as
/// decompose_full, without back-transforming the rest.
EigenDecomposition decompose_largest(const sim::SimilarityMatrix& s, std::size_t count);

/// Largest `count` eigenpairs by a restarted block Rayleigh-Ritz iteration.
/// Throws EigensolveFailure if the residuals do not reach `tolerance` (relative
/// to the largest eigenvalue magnitude) within `max_iterations` expansions.
EigenDecomposition decompose_top(const sim::SimilarityMatrix& s, std::size_t count,
                                 double tolerance = 1e-12, std::size_t max_iterations = 2000);

/// ||S - Q diag(L) Q^T||_F / ||S||_F for a full decomposition.
double reconstruction_error(const sim::SimilarityMatrix& s, const EigenDecomposition& eig);

// ---- adapters ---------------------------------------------------------------

/// 1 - |e_t| / max_j |e_j| where e_t is row t of the top-k eigenvectors.
/// Eigenpairs whose eigenvalue is not above 1e-10 * lambda_max are numerically
/// null and are left out of E.
RowScores spectral_scores(const EigenDecomposition& eig, std::size_t k);
RowScores spectral_residual_score(const sim::SimilarityMatrix& s, const SpectralParams& params,
                                  EigenSolver solver = EigenSolver::Full);

/// Raw LOF values on D = max(S) - S with D_ii = 0. Neighbour ties are broken
/// by lower row index and exactly `neighbors` neighbours are kept.
std::vector<double> lof_score(const sim::SimilarityMatrix& s, const LofParams& params);

/// 1 - mean off-diagonal similarity of each row.
std::vector<double> mean_similarity_score(const sim::SimilarityMatrix& s);

/// 1 - mean of the top_k largest off-diagonal similarities left after
/// dropping floor(alpha * n_t) values from each end of the sorted row.
std::vector<double> trimmed_topk_score(const sim::SimilarityMatrix& s, const TrimmedParams& params);

/// (s - min) / (max - min + 1e-9).
std::vector<double> normalize_scores(std::span<const double> raw);

inline constexpr double kNormalizeEpsilon = 1e-9;

/// Runs the configured adapter on one batch. Rows flagged as zero-norm carry no
/// direction and are scored on the informative rows only; they receive the
/// lowest informative score. Fewer informative rows than the adapter needs
/// yields all-zero, degenerate scores.
RowScores score_batch(const sim::SimilarityMatrix& s, const AdapterConfig& config);

/// Min-max normalises over the non-pad rows of one batch; pad rows get 0.
std::vector<double> normalize_batch(std::span<const double> raw, std::span<const io::RowRef> rows);

/// Maps per-batch row scores back onto timesteps. Pad rows are dropped; a
/// timestep covered by several rows (stride < L) receives their mean.
ScoreSeries assemble_series_scores(const std::vector<std::vector<double>>& batch_scores,
                                   const sim::BatchPartition& partition, const io::WindowPlan& plan,
                                   const AdapterConfig& config);

/// Correctly rounded sum (Shewchuk partials); independent of summation order.
double exact_sum(std::span<const double> values);

}  // namespace themis::adapt
