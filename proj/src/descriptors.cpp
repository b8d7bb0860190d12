#include "tstdd/descriptors.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tstdd/binary_io.hpp"
#include "tstdd/error.hpp"

namespace tstdd {

Eigen::VectorXd trajectory_pool(const Trajectory& trajectory, const FeatureMapStack& c_norm) {
  Eigen::VectorXd pooled = Eigen::VectorXd::Zero(c_norm.channels);
  const double r = c_norm.map_ratio;
  for (const TrajectoryPoint& p : trajectory.points) {
    if (p.z < 0 || p.z >= c_norm.length) {
      fail(ErrorKind::invalid_argument, "trajectory_pool: frame index " + std::to_string(p.z) +
                                            " outside [0, " + std::to_string(c_norm.length) + ")");
    }
    const int mx = std::clamp(static_cast<int>(round_half_up(r * p.x)), 0, c_norm.width - 1);
    const int my = std::clamp(static_cast<int>(round_half_up(r * p.y)), 0, c_norm.height - 1);
    for (int n = 0; n < c_norm.channels; ++n) pooled[n] += c_norm.at(mx, my, p.z, n);
  }
  return pooled;
}

NormalizedLayer normalize_layer(const FeatureMapStack& raw) {
  return {spatiotemporal_normalize(raw), channel_normalize(raw)};
}

namespace {

void check_layers(std::span<const NormalizedLayer> layers) {
  require(!layers.empty(), "assemble_stream_tdd: no layers");
  const Stream stream = layers[0].spatiotemporal.stream;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const NormalizedLayer& l = layers[i];
    if (l.spatiotemporal.stream != stream || l.channel.stream != stream) {
      fail(ErrorKind::invalid_argument, "assemble_stream_tdd: layers come from different streams");
    }
    if (l.spatiotemporal.layer_id != l.channel.layer_id) {
      fail(ErrorKind::invalid_argument, "assemble_stream_tdd: normalization pair has mismatched layer ids");
    }
    if (i > 0 && !(layers[i - 1].spatiotemporal.layer_id < l.spatiotemporal.layer_id)) {
      fail(ErrorKind::invalid_argument, "assemble_stream_tdd: layer ids must be strictly ascending ('" +
                                            layers[i - 1].spatiotemporal.layer_id + "' before '" +
                                            l.spatiotemporal.layer_id + "')");
    }
  }
}

}  // namespace

std::size_t stream_tdd_length(std::span<const NormalizedLayer> layers) {
  std::size_t n = 0;
  for (const NormalizedLayer& l : layers) n += std::size_t(l.spatiotemporal.channels) + l.channel.channels;
  return n;
}

Tdd assemble_stream_tdd(std::size_t trajectory_index, const Trajectory& trajectory,
                        std::span<const NormalizedLayer> layers) {
  check_layers(layers);
  Tdd tdd;
  tdd.trajectory_index = trajectory_index;
  tdd.stream = layers[0].spatiotemporal.stream;
  tdd.values.resize(static_cast<Eigen::Index>(stream_tdd_length(layers)));
  Eigen::Index offset = 0;
  for (const NormalizedLayer& l : layers) {
    for (const FeatureMapStack* maps : {&l.spatiotemporal, &l.channel}) {
      const Eigen::VectorXd pooled = trajectory_pool(trajectory, *maps);
      tdd.values.segment(offset, pooled.size()) = pooled;
      offset += pooled.size();
    }
  }
  return tdd;
}

Eigen::MatrixXd pool_stream(std::span<const Trajectory> trajectories, std::span<const NormalizedLayer> layers) {
  check_layers(layers);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(trajectories.size()), static_cast<Eigen::Index>(stream_tdd_length(layers)));
  for (std::size_t k = 0; k < trajectories.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = assemble_stream_tdd(k, trajectories[k], layers).values.transpose();
  }
  return out;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd PcaModel::project(const Eigen::VectorXd& x) const {
  require(x.size() == input_dim(), "pca: input length mismatch");
  return components.transpose() * (x - mean);
}

Eigen::MatrixXd PcaModel::project_rows(const Eigen::MatrixXd& rows) const {
  require(rows.cols() == input_dim(), "pca: input length mismatch");
  return (rows.rowwise() - mean.transpose()) * components;
}

Eigen::VectorXd PcaModel::reconstruct(const Eigen::VectorXd& y) const {
  require(y.size() == output_dim(), "pca: code length mismatch");
  return mean + components * y;
}

PcaModel fit_pca(const Eigen::MatrixXd& samples, int target_dim) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index d = samples.cols();
  if (n < 2) fail(ErrorKind::invalid_argument, "fit_pca: need at least 2 samples");
  require(d >= 1, "fit_pca: samples have zero dimension");
  require(target_dim >= 1, "fit_pca: target dimension must be >= 1");
  if (!samples.allFinite()) fail(ErrorKind::invalid_argument, "fit_pca: non-finite sample");

  PcaModel model;
  model.requested_dim = target_dim;
  model.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - model.mean.transpose();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / double(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) fail(ErrorKind::numeric, "fit_pca: eigendecomposition failed");

  const Eigen::Index keep = std::min<Eigen::Index>({target_dim, d, n - 1});
  model.components.resize(d, keep);
  model.explained_variance.resize(keep);
  // Eigen returns ascending eigenvalues.
  for (Eigen::Index j = 0; j < keep; ++j) {
    const Eigen::Index src = d - 1 - j;
    Eigen::VectorXd col = solver.eigenvectors().col(src);
    Eigen::Index arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    if (col[arg] < 0) col = -col;
    model.components.col(j) = col;
    model.explained_variance[j] = std::max(0.0, solver.eigenvalues()[src]);
  }
  return model;
}

PcaModel truncate_pca(const PcaModel& model, Eigen::Index dim) {
  require(dim >= 1 && dim <= model.output_dim(), "truncate_pca: dimension out of range");
  PcaModel out;
  out.mean = model.mean;
  out.components = model.components.leftCols(dim);
  out.explained_variance = model.explained_variance.head(dim);
  out.requested_dim = model.requested_dim;
  return out;
}

Eigen::VectorXd assemble_tstdd(std::span<const Eigen::VectorXd> parts) {
  require(!parts.empty(), "assemble_tstdd: no stream descriptors");
  const Eigen::Index len = parts[0].size();
  for (const Eigen::VectorXd& p : parts) {
    if (p.size() != len) {
      fail(ErrorKind::invalid_argument, "assemble_tstdd: stream descriptor lengths differ (" + std::to_string(len) +
                                            " vs " + std::to_string(p.size()) + ")");
    }
  }
  Eigen::VectorXd out(len * static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) out.segment(static_cast<Eigen::Index>(i) * len, len) = parts[i];
  return out;
}

Eigen::VectorXd assemble_tstdd(const Eigen::VectorXd& lt, const Eigen::VectorXd& st, const Eigen::VectorXd& gt) {
  const Eigen::VectorXd parts[] = {lt, st, gt};
  return assemble_tstdd(parts);
}

// ---------------------------------------------------------------------------

void save_pca(const std::filesystem::path& path, const PcaModel& model) {
  std::ostringstream buf;
  BinaryWriter out(buf);
  out.magic("PCAM");
  out.u32(static_cast<std::uint32_t>(model.input_dim()));
  out.u32(static_cast<std::uint32_t>(model.output_dim()));
  for (Eigen::Index i = 0; i < model.mean.size(); ++i) out.f64(model.mean[i]);
  for (Eigen::Index j = 0; j < model.components.cols(); ++j)
    for (Eigen::Index i = 0; i < model.components.rows(); ++i) out.f64(model.components(i, j));
  for (Eigen::Index j = 0; j < model.explained_variance.size(); ++j) out.f64(model.explained_variance[j]);
  write_file_atomically(path, buf.str());
}

PcaModel load_pca(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) fail(ErrorKind::io, "cannot open PCA model: " + path.string());
  BinaryReader in(file, path.string());
  in.expect_magic("PCAM");
  const std::uint32_t d = in.u32();
  const std::uint32_t k = in.u32();
  if (d == 0 || k == 0 || k > d || d > (1u << 20)) fail(ErrorKind::format, path.string() + ": bad PCA dimensions");
  PcaModel model;
  model.mean.resize(d);
  model.components.resize(d, k);
  model.explained_variance.resize(k);
  for (std::uint32_t i = 0; i < d; ++i) model.mean[i] = in.f64();
  for (std::uint32_t j = 0; j < k; ++j)
    for (std::uint32_t i = 0; i < d; ++i) model.components(i, j) = in.f64();
  for (std::uint32_t j = 0; j < k; ++j) model.explained_variance[j] = in.f64();
  model.requested_dim = static_cast<int>(k);
  return model;
}

void write_descriptor_block(std::ostream& stream, const Eigen::MatrixXd& rows) {
  BinaryWriter out(stream);
  out.magic("TSTD");
  out.u32(static_cast<std::uint32_t>(rows.rows()));
  out.u32(static_cast<std::uint32_t>(rows.cols()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    for (Eigen::Index j = 0; j < rows.cols(); ++j) out.f32(static_cast<float>(rows(i, j)));
}

Eigen::MatrixXd read_descriptor_block(std::istream& stream, const std::string& context) {
  BinaryReader in(stream, context);
  in.expect_magic("TSTD");
  const std::uint32_t count = in.u32();
  const std::uint32_t dim = in.u32();
  if (std::uint64_t(count) * dim > (1ull << 30)) fail(ErrorKind::format, context + ": descriptor block too large");
  Eigen::MatrixXd rows(count, dim);
  for (std::uint32_t i = 0; i < count; ++i)
    for (std::uint32_t j = 0; j < dim; ++j) {
      const float v = in.f32();
      if (!std::isfinite(v)) fail(ErrorKind::format, context + ": non-finite descriptor value");
      rows(i, j) = v;
    }
  return rows;
}

}  // namespace tstdd
