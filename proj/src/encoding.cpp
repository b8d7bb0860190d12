#include "tstdd/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "tstdd/binary_io.hpp"
#include "tstdd/descriptors.hpp"
#include "tstdd/error.hpp"
#include "tstdd/rng.hpp"

namespace tstdd {

void LlcConfig::validate() const {
  require(k_bases >= 1, "llc: k_bases must be >= 1");
  require(lambda > 0.0, "llc: lambda must be > 0");
  require(samples_per_video >= 1, "llc: samples_per_video must be >= 1");
}

namespace {

std::vector<int> kmeanspp_seeds(const Eigen::MatrixXd& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  std::vector<int> chosen;
  chosen.reserve(k);
  chosen.push_back(static_cast<int>(rng.below(n)));
  Eigen::VectorXd nearest = (x.rowwise() - x.row(chosen[0])).rowwise().squaredNorm();
  while (static_cast<int>(chosen.size()) < k) {
    const double total = nearest.sum();
    if (!(total > 0.0)) {
      fail(ErrorKind::invalid_argument, "kmeans: only " + std::to_string(chosen.size()) +
                                            " distinct descriptors for " + std::to_string(k) + " centers");
    }
    const double target = rng.uniform() * total;
    double acc = 0.0;
    Eigen::Index pick = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (nearest[i] <= 0.0) continue;
      acc += nearest[i];
      pick = i;
      if (acc > target) break;
    }
    chosen.push_back(static_cast<int>(pick));
    nearest = nearest.cwiseMin((x.rowwise() - x.row(pick)).rowwise().squaredNorm());
  }
  return chosen;
}

double min_pairwise_distance(const Eigen::MatrixXd& c) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < c.rows(); ++i)
    for (Eigen::Index j = i + 1; j < c.rows(); ++j) best = std::min(best, (c.row(i) - c.row(j)).squaredNorm());
  return std::sqrt(best);
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& samples, int k, std::uint64_t seed, const KMeansConfig& cfg) {
  const Eigen::Index n = samples.rows();
  require(k >= 1, "kmeans: k must be >= 1");
  if (n < k) {
    fail(ErrorKind::invalid_argument, "kmeans: " + std::to_string(n) + " descriptors are insufficient for " +
                                          std::to_string(k) + " centers");
  }
  require(cfg.max_iterations >= 1, "kmeans: max_iterations must be >= 1");

  Rng rng(seed);
  const std::vector<int> seeds = kmeanspp_seeds(samples, k, rng);
  Eigen::MatrixXd centers(k, samples.cols());
  for (int j = 0; j < k; ++j) centers.row(j) = samples.row(seeds[j]);

  const Eigen::VectorXd sample_norms = samples.rowwise().squaredNorm();
  std::vector<int> assignment(n, 0);
  KMeansResult result;
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    // ||x||^2 - 2 x.c + ||c||^2 through one matrix product.
    const Eigen::MatrixXd cross = samples * centers.transpose();
    const Eigen::VectorXd center_norms = centers.rowwise().squaredNorm();
    double objective = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        const double d = sample_norms[i] - 2.0 * cross(i, j) + center_norms[j];
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      assignment[i] = best;
      objective += (samples.row(i) - centers.row(best)).squaredNorm();
    }
    if (!result.objective_trace.empty()) {
      const double prev = result.objective_trace.back();
      if (objective > prev + 1e-9 * std::max(1.0, prev)) {
        fail(ErrorKind::numeric, "kmeans: objective increased between iterations");
      }
    }
    result.objective_trace.push_back(objective);

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, samples.cols());
    std::vector<int> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assignment[i]) += samples.row(i);
      ++counts[assignment[i]];
    }
    double max_shift = 0.0;
    for (int j = 0; j < k; ++j) {
      if (counts[j] == 0) continue;
      const Eigen::RowVectorXd updated = sums.row(j) / double(counts[j]);
      max_shift = std::max(max_shift, (updated - centers.row(j)).norm());
      centers.row(j) = updated;
    }
    result.iterations = iter + 1;
    if (max_shift < cfg.tolerance) break;
  }
  if (k > 1 && !(min_pairwise_distance(centers) > 0.0)) {
    fail(ErrorKind::numeric, "kmeans: codebook has duplicate centers");
  }
  result.codebook.centers = std::move(centers);
  return result;
}

Codebook build_codebook(std::span<const Eigen::MatrixXd> video_descriptors, int size, const LlcConfig& llc,
                        std::uint64_t seed, const KMeansConfig& kmeans_cfg) {
  llc.validate();
  require(!video_descriptors.empty(), "build_codebook: no training videos");
  const Eigen::Index dim = video_descriptors[0].cols();
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> picks;
  Eigen::Index total = 0;
  for (const Eigen::MatrixXd& v : video_descriptors) {
    require(v.cols() == dim, "build_codebook: descriptor dimensions differ between videos");
    picks.push_back(rng.sample_indices(static_cast<std::size_t>(v.rows()), static_cast<std::size_t>(llc.samples_per_video)));
    total += static_cast<Eigen::Index>(picks.back().size());
  }
  if (total < size) {
    fail(ErrorKind::invalid_argument, "build_codebook: " + std::to_string(total) +
                                          " sampled descriptors are insufficient for a codebook of " +
                                          std::to_string(size));
  }
  Eigen::MatrixXd samples(total, dim);
  Eigen::Index row = 0;
  for (std::size_t v = 0; v < video_descriptors.size(); ++v)
    for (std::size_t i : picks[v]) samples.row(row++) = video_descriptors[v].row(static_cast<Eigen::Index>(i));
  return kmeans(samples, size, rng.next(), kmeans_cfg).codebook;
}

std::vector<int> nearest_centers(const Eigen::VectorXd& x, const Codebook& codebook, int k) {
  require(x.size() == codebook.dim(), "llc: descriptor length does not match the codebook");
  require(k >= 1 && k <= codebook.size(), "llc: k_bases must lie in [1, K_c]");
  const Eigen::VectorXd d2 = (codebook.centers.rowwise() - x.transpose()).rowwise().squaredNorm();
  std::vector<int> order(static_cast<std::size_t>(codebook.size()));
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](int a, int b) { return d2[a] < d2[b] || (d2[a] == d2[b] && a < b); });
  order.resize(k);
  return order;
}

SparseCode llc_encode(const Eigen::VectorXd& x, const Codebook& codebook, const LlcConfig& cfg) {
  cfg.validate();
  if (!x.allFinite()) fail(ErrorKind::invalid_argument, "llc_encode: non-finite descriptor");
  SparseCode code;
  code.indices = nearest_centers(x, codebook, cfg.k_bases);
  const int k = cfg.k_bases;
  if (k == 1) {
    code.weights = {1.0};
    return code;
  }
  Eigen::MatrixXd shifted(k, x.size());
  for (int i = 0; i < k; ++i) shifted.row(i) = codebook.centers.row(code.indices[i]) - x.transpose();
  Eigen::MatrixXd local = shifted * shifted.transpose();
  const double ridge = cfg.lambda * local.trace();
  local.diagonal().array() += ridge;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(local);
  Eigen::VectorXd w = ldlt.solve(Eigen::VectorXd::Ones(k));
  if (ldlt.info() != Eigen::Success || !w.allFinite() || w.sum() == 0.0) {
    fail(ErrorKind::numeric, "llc_encode: singular local system");
  }
  w /= w.sum();
  code.weights.assign(w.data(), w.data() + k);
  return code;
}

Eigen::VectorXd pool_codes(std::span<const SparseCode> codes, Eigen::Index codebook_size, Pooling pooling) {
  require(!codes.empty(), "pool_codes: no codes to pool");
  Eigen::VectorXd pooled = Eigen::VectorXd::Zero(codebook_size);
  for (const SparseCode& c : codes) {
    for (std::size_t i = 0; i < c.indices.size(); ++i) {
      const int j = c.indices[i];
      require(j >= 0 && j < codebook_size, "pool_codes: code index out of range");
      if (pooling == Pooling::max) {
        pooled[j] = std::max(pooled[j], std::abs(c.weights[i]));
      } else {
        pooled[j] += c.weights[i];
      }
    }
  }
  const double norm = pooled.norm();
  if (norm > 0.0) pooled /= norm;
  return pooled;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd WhitenModel::transform(const Eigen::VectorXd& x) const {
  require(x.size() == input_dim(), "whiten: input length mismatch");
  const Eigen::VectorXd scale = (eigenvalues.array() + kRegularizer).sqrt().inverse();
  return (components.transpose() * (x - mean)).cwiseProduct(scale);
}

Eigen::MatrixXd WhitenModel::transform_rows(const Eigen::MatrixXd& rows) const {
  require(rows.cols() == input_dim(), "whiten: input length mismatch");
  const Eigen::RowVectorXd scale = (eigenvalues.array() + kRegularizer).sqrt().inverse().matrix().transpose();
  return ((rows.rowwise() - mean.transpose()) * components).array().rowwise() * scale.array();
}

Eigen::VectorXd WhitenModel::inverse(const Eigen::VectorXd& y) const {
  require(y.size() == output_dim(), "whiten: code length mismatch");
  const Eigen::VectorXd scale = (eigenvalues.array() + kRegularizer).sqrt();
  return mean + components * y.cwiseProduct(scale);
}

WhitenModel fit_whitening(const Eigen::MatrixXd& encodings, double retain) {
  require(retain > 0.0 && retain < 1.0, "fit_whitening: retain must lie in (0, 1)");
  if (encodings.rows() < 2) fail(ErrorKind::invalid_argument, "fit_whitening: need at least 2 training encodings");
  const PcaModel full = fit_pca(encodings, static_cast<int>(encodings.cols()));
  const double total = full.explained_variance.sum();
  if (!(total > 0.0)) fail(ErrorKind::numeric, "fit_whitening: training encodings are all identical");

  Eigen::Index keep = full.output_dim();
  double cumulative = 0.0;
  for (Eigen::Index j = 0; j < full.output_dim(); ++j) {
    cumulative += full.explained_variance[j];
    if (cumulative / total > retain) {
      keep = j + 1;
      break;
    }
  }
  WhitenModel model;
  model.mean = full.mean;
  model.components = full.components.leftCols(keep);
  model.eigenvalues = full.explained_variance.head(keep);
  model.retained_fraction = model.eigenvalues.sum() / total;
  return model;
}

void save_codebook(const std::filesystem::path& path, const Codebook& codebook) {
  std::ostringstream buf;
  BinaryWriter out(buf);
  out.magic("CDBK");
  out.u32(static_cast<std::uint32_t>(codebook.size()));
  out.u32(static_cast<std::uint32_t>(codebook.dim()));
  for (Eigen::Index i = 0; i < codebook.size(); ++i)
    for (Eigen::Index j = 0; j < codebook.dim(); ++j) out.f32(static_cast<float>(codebook.centers(i, j)));
  write_file_atomically(path, buf.str());
}

Codebook load_codebook(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) fail(ErrorKind::io, "cannot open codebook: " + path.string());
  BinaryReader in(file, path.string());
  in.expect_magic("CDBK");
  const std::uint32_t k = in.u32();
  const std::uint32_t d = in.u32();
  if (k == 0 || d == 0 || std::uint64_t(k) * d > (1ull << 28)) fail(ErrorKind::format, path.string() + ": bad codebook dimensions");
  Codebook cb;
  cb.centers.resize(k, d);
  for (std::uint32_t i = 0; i < k; ++i)
    for (std::uint32_t j = 0; j < d; ++j) cb.centers(i, j) = in.f32();
  if (!cb.centers.allFinite()) fail(ErrorKind::format, path.string() + ": non-finite codebook entry");
  return cb;
}

void save_whitening(const std::filesystem::path& path, const WhitenModel& model) {
  std::ostringstream buf;
  BinaryWriter out(buf);
  out.magic("WHTN");
  out.u32(static_cast<std::uint32_t>(model.input_dim()));
  out.u32(static_cast<std::uint32_t>(model.output_dim()));
  for (Eigen::Index i = 0; i < model.mean.size(); ++i) out.f64(model.mean[i]);
  for (Eigen::Index j = 0; j < model.components.cols(); ++j)
    for (Eigen::Index i = 0; i < model.components.rows(); ++i) out.f64(model.components(i, j));
  for (Eigen::Index j = 0; j < model.eigenvalues.size(); ++j) out.f64(model.eigenvalues[j]);
  write_file_atomically(path, buf.str());
}

WhitenModel load_whitening(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) fail(ErrorKind::io, "cannot open whitening model: " + path.string());
  BinaryReader in(file, path.string());
  in.expect_magic("WHTN");
  const std::uint32_t d = in.u32();
  const std::uint32_t k = in.u32();
  if (d == 0 || k == 0 || k > d || d > (1u << 20)) fail(ErrorKind::format, path.string() + ": bad whitening dimensions");
  WhitenModel model;
  model.mean.resize(d);
  model.components.resize(d, k);
  model.eigenvalues.resize(k);
  for (std::uint32_t i = 0; i < d; ++i) model.mean[i] = in.f64();
  for (std::uint32_t j = 0; j < k; ++j)
    for (std::uint32_t i = 0; i < d; ++i) model.components(i, j) = in.f64();
  for (std::uint32_t j = 0; j < k; ++j) model.eigenvalues[j] = in.f64();
  model.retained_fraction = 0.0;
  return model;
}

}  // namespace tstdd
