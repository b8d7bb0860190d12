#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tstdd/featmaps.hpp"
#include "tstdd/trajectories.hpp"

namespace tstdd {

/// Sum of c_norm(round(r x_p), round(r y_p), z_p, n) over the trajectory's points, per channel.
/// Map coordinates are rounded half-up and clamped to the map.
Eigen::VectorXd trajectory_pool(const Trajectory& trajectory, const FeatureMapStack& c_norm);

/// One layer under both normalizations.
struct NormalizedLayer {
  FeatureMapStack spatiotemporal;
  FeatureMapStack channel;
};

NormalizedLayer normalize_layer(const FeatureMapStack& raw);

struct Tdd {
  std::size_t trajectory_index = 0;
  Stream stream = Stream::local_temporal;
  Eigen::VectorXd values;
};

/// Concatenates pooled responses ordered by layer, then normalization (spatiotemporal first),
/// then channel. Layers must belong to one stream and have strictly ascending layer ids.
Tdd assemble_stream_tdd(std::size_t trajectory_index, const Trajectory& trajectory,
                        std::span<const NormalizedLayer> layers);

/// Pools every trajectory into a K x D matrix (row k is trajectory k).
Eigen::MatrixXd pool_stream(std::span<const Trajectory> trajectories, std::span<const NormalizedLayer> layers);

/// Length of a stream TDD for the given layers.
std::size_t stream_tdd_length(std::span<const NormalizedLayer> layers);

// ---------------------------------------------------------------------------

struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;          // d x d', orthonormal columns
  Eigen::VectorXd explained_variance;  // d', non-increasing
  int requested_dim = 0;               // before the sample-rank limit was applied

  Eigen::Index input_dim() const { return mean.size(); }
  Eigen::Index output_dim() const { return components.cols(); }

  Eigen::VectorXd project(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd project_rows(const Eigen::MatrixXd& rows) const;
  Eigen::VectorXd reconstruct(const Eigen::VectorXd& y) const;
};

/// Eigendecomposition of the sample covariance (rows are samples). Keeps
/// min(target_dim, dim, samples - 1) components, ordered by variance; each component's
/// largest-magnitude entry is made positive.
PcaModel fit_pca(const Eigen::MatrixXd& samples, int target_dim);

/// Keeps the first `dim` components.
PcaModel truncate_pca(const PcaModel& model, Eigen::Index dim);

/// Concatenates per-stream reduced descriptors (stream order lt, st, gt). All parts must
/// have the same length.
Eigen::VectorXd assemble_tstdd(std::span<const Eigen::VectorXd> parts);
Eigen::VectorXd assemble_tstdd(const Eigen::VectorXd& lt, const Eigen::VectorXd& st, const Eigen::VectorXd& gt);

// "PCAM": u32 d, u32 d', f64 mean[d], f64 components (column-major d x d'), f64 variances[d'].
void save_pca(const std::filesystem::path& path, const PcaModel& model);
PcaModel load_pca(const std::filesystem::path& path);

// "TSTD": u32 count, u32 dim, then count x dim f32 row-major.
void write_descriptor_block(std::ostream& out, const Eigen::MatrixXd& rows);
Eigen::MatrixXd read_descriptor_block(std::istream& in, const std::string& context);

}  // namespace tstdd
