#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace tstdd {

/// K_c x Dim matrix of distinct centers.
struct Codebook {
  Eigen::MatrixXd centers;

  Eigen::Index size() const { return centers.rows(); }
  Eigen::Index dim() const { return centers.cols(); }
};

enum class Pooling { max, sum };

struct LlcConfig {
  int k_bases = 5;
  double lambda = 1e-4;
  int samples_per_video = 200;
  Pooling pooling = Pooling::max;

  void validate() const;
};

struct KMeansConfig {
  int max_iterations = 100;
  double tolerance = 1e-6;  // stop once no center moves farther than this
};

struct KMeansResult {
  Codebook codebook;
  std::vector<double> objective_trace;  // sum of squared distances after each assignment step
  int iterations = 0;
};

/// Lloyd iterations from a seeded k-means++ start. Assignment ties go to the lower index;
/// a center that loses all its points stays where it was.
KMeansResult kmeans(const Eigen::MatrixXd& samples, int k, std::uint64_t seed, const KMeansConfig& cfg = {});

/// Draws min(samples_per_video, rows) descriptors from each video with a generator seeded
/// by `seed`, then clusters them into `size` centers.
Codebook build_codebook(std::span<const Eigen::MatrixXd> video_descriptors, int size, const LlcConfig& llc,
                        std::uint64_t seed, const KMeansConfig& kmeans_cfg = {});

struct SparseCode {
  std::vector<int> indices;  // the k nearest centers, nearest first
  std::vector<double> weights;
};

/// Indices of the k nearest centers, ties broken by lower index.
std::vector<int> nearest_centers(const Eigen::VectorXd& x, const Codebook& codebook, int k);

/// Locality-constrained linear code over the k nearest centers: minimizes
/// ||x - sum w_i b_i||^2 + lambda tr(C) ||w||^2 subject to sum w_i = 1, where C is the
/// local covariance of the shifted bases.
SparseCode llc_encode(const Eigen::VectorXd& x, const Codebook& codebook, const LlcConfig& cfg);

/// Pools per-trajectory codes into one K_c vector (max of |code| or signed sum), then L2-normalizes.
Eigen::VectorXd pool_codes(std::span<const SparseCode> codes, Eigen::Index codebook_size, Pooling pooling = Pooling::max);

struct WhitenModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;   // d x d'
  Eigen::VectorXd eigenvalues;  // d', retained
  double retained_fraction = 0.0;

  static constexpr double kRegularizer = 1e-10;

  Eigen::Index input_dim() const { return mean.size(); }
  Eigen::Index output_dim() const { return components.cols(); }
  Eigen::VectorXd transform(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd transform_rows(const Eigen::MatrixXd& rows) const;
  Eigen::VectorXd inverse(const Eigen::VectorXd& y) const;
};

/// PCA on the training encodings keeping the smallest d' whose cumulative explained
/// variance exceeds `retain`; coordinates are scaled by 1 / sqrt(eigenvalue + 1e-10).
WhitenModel fit_whitening(const Eigen::MatrixXd& encodings, double retain = 0.99);

// "CDBK": u32 K_c, u32 Dim, f32 row-major centers.
void save_codebook(const std::filesystem::path& path, const Codebook& codebook);
Codebook load_codebook(const std::filesystem::path& path);

// "WHTN": u32 d, u32 d', f64 mean, f64 components (column-major), f64 eigenvalues.
void save_whitening(const std::filesystem::path& path, const WhitenModel& model);
WhitenModel load_whitening(const std::filesystem::path& path);

}  // namespace tstdd
