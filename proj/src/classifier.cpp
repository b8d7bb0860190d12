#include "tstdd/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tstdd/binary_io.hpp"
#include "tstdd/error.hpp"
#include "tstdd/parallel.hpp"

namespace tstdd {

void SvmConfig::validate() const {
  require(c > 0.0 && std::isfinite(c), "svm: C must be a positive finite number");
  require(tolerance > 0.0, "svm: tolerance must be > 0");
  require(max_epochs >= 1, "svm: max_epochs must be >= 1");
}

double BinarySvm::relative_gap() const { return (primal - dual) / std::max(1.0, std::abs(primal)); }

BinarySvm train_binary_svm(const Eigen::MatrixXd& x, std::span<const int> y, const SvmConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  require(n >= 1, "svm: empty training set");
  require(static_cast<Eigen::Index>(y.size()) == n, "svm: label count does not match sample count");
  for (int label : y) require(label == 1 || label == -1, "svm: binary labels must be +1 or -1");
  if (!x.allFinite()) fail(ErrorKind::invalid_argument, "svm: non-finite feature value");

  const Eigen::VectorXd sq_norm = (x.rowwise().squaredNorm().array() + 1.0).matrix();
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0.0;

  BinarySvm out;
  auto dual_objective = [&] { return alpha.sum() - 0.5 * (w.squaredNorm() + b * b); };
  double prev_dual = 0.0;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    double max_violation = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double yi = y[i];
      const double g = yi * (x.row(i).dot(w) + b) - 1.0;
      double pg = g;
      if (alpha[i] <= 0.0) pg = std::min(g, 0.0);
      else if (alpha[i] >= cfg.c) pg = std::max(g, 0.0);
      max_violation = std::max(max_violation, std::abs(pg));
      if (pg == 0.0) continue;
      const double updated = std::clamp(alpha[i] - g / sq_norm[i], 0.0, cfg.c);
      const double delta = (updated - alpha[i]) * yi;
      alpha[i] = updated;
      w += delta * x.row(i).transpose();
      b += delta;
    }
    const double dual = dual_objective();
    if (dual < prev_dual - 1e-9 * std::max(1.0, std::abs(prev_dual))) {
      fail(ErrorKind::numeric, "svm: dual objective decreased during coordinate descent");
    }
    prev_dual = dual;
    out.dual_trace.push_back(dual);
    out.epochs = epoch + 1;
    if (max_violation < cfg.tolerance) {
      out.converged = true;
      break;
    }
  }
  double hinge = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) hinge += std::max(0.0, 1.0 - y[i] * (x.row(i).dot(w) + b));
  out.w = std::move(w);
  out.b = b;
  out.dual = prev_dual;
  out.primal = 0.5 * (out.w.squaredNorm() + b * b) + cfg.c * hinge;
  return out;
}

SvmModel train_svm(const Eigen::MatrixXd& features, std::span<const std::string> labels, const SvmConfig& cfg,
                   int threads) {
  cfg.validate();
  if (features.rows() == 0) fail(ErrorKind::invalid_argument, "train_svm: empty feature set");
  require(static_cast<Eigen::Index>(labels.size()) == features.rows(), "train_svm: label count does not match sample count");

  SvmModel model;
  model.labels.assign(labels.begin(), labels.end());
  std::sort(model.labels.begin(), model.labels.end());
  model.labels.erase(std::unique(model.labels.begin(), model.labels.end()), model.labels.end());
  if (model.labels.size() < 2) fail(ErrorKind::invalid_argument, "train_svm: need at least 2 classes");

  const std::size_t classes = model.labels.size();
  model.c = cfg.c;
  model.diagnostics.resize(classes);
  parallel_for(classes, threads, [&](std::size_t k) {
    std::vector<int> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == model.labels[k] ? 1 : -1;
    model.diagnostics[k] = train_binary_svm(features, y, cfg);
  });
  model.weights.resize(static_cast<Eigen::Index>(classes), features.cols());
  model.biases.resize(static_cast<Eigen::Index>(classes));
  for (std::size_t k = 0; k < classes; ++k) {
    model.weights.row(static_cast<Eigen::Index>(k)) = model.diagnostics[k].w.transpose();
    model.biases[static_cast<Eigen::Index>(k)] = model.diagnostics[k].b;
  }
  return model;
}

Prediction predict(const SvmModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.dim()) {
    fail(ErrorKind::invalid_argument, "predict: feature length " + std::to_string(x.size()) +
                                          " does not match model dimension " + std::to_string(model.dim()));
  }
  Prediction p;
  p.scores = model.weights * x + model.biases;
  for (Eigen::Index k = 1; k < p.scores.size(); ++k) {
    if (p.scores[k] > p.scores[static_cast<Eigen::Index>(p.class_index)]) p.class_index = static_cast<std::size_t>(k);
  }
  return p;
}

Evaluation evaluate(const SvmModel& model, const Eigen::MatrixXd& features, std::span<const std::string> labels) {
  if (features.rows() == 0) fail(ErrorKind::invalid_argument, "evaluate: empty test set");
  require(static_cast<Eigen::Index>(labels.size()) == features.rows(), "evaluate: label count does not match sample count");
  const auto classes = static_cast<Eigen::Index>(model.num_classes());
  Evaluation ev;
  ev.confusion = Eigen::MatrixXi::Zero(classes, classes);
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const auto it = std::lower_bound(model.labels.begin(), model.labels.end(), labels[i]);
    if (it == model.labels.end() || *it != labels[i]) {
      fail(ErrorKind::invalid_argument, "evaluate: label '" + labels[i] + "' is unknown to the model");
    }
    const auto truth = static_cast<std::size_t>(it - model.labels.begin());
    const std::size_t guess = predict(model, features.row(i).transpose()).class_index;
    ++ev.confusion(static_cast<Eigen::Index>(truth), static_cast<Eigen::Index>(guess));
    if (truth == guess) ++correct;
  }
  ev.accuracy = double(correct) / double(features.rows());
  for (Eigen::Index k = 0; k < classes; ++k) {
    const int total = ev.confusion.row(k).sum();
    ev.per_class_accuracy.push_back(total == 0 ? 0.0 : double(ev.confusion(k, k)) / total);
  }
  return ev;
}

void save_svm(const std::filesystem::path& path, const SvmModel& model) {
  std::ostringstream buf;
  BinaryWriter out(buf);
  out.magic("LSVM");
  out.u32(static_cast<std::uint32_t>(model.num_classes()));
  out.u32(static_cast<std::uint32_t>(model.dim()));
  out.f64(model.c);
  for (std::size_t k = 0; k < model.num_classes(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    out.text(model.labels[k]);
    for (Eigen::Index j = 0; j < model.dim(); ++j) out.f64(model.weights(row, j));
    out.f64(model.biases[row]);
  }
  write_file_atomically(path, buf.str());
}

SvmModel load_svm(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) fail(ErrorKind::io, "cannot open SVM model: " + path.string());
  BinaryReader in(file, path.string());
  in.expect_magic("LSVM");
  const std::uint32_t classes = in.u32();
  const std::uint32_t d = in.u32();
  if (classes < 2 || d == 0 || std::uint64_t(classes) * d > (1ull << 28)) {
    fail(ErrorKind::format, path.string() + ": bad SVM dimensions");
  }
  SvmModel model;
  model.c = in.f64();
  model.weights.resize(classes, d);
  model.biases.resize(classes);
  for (std::uint32_t k = 0; k < classes; ++k) {
    model.labels.push_back(in.text());
    for (std::uint32_t j = 0; j < d; ++j) model.weights(k, j) = in.f64();
    model.biases[k] = in.f64();
  }
  if (!std::is_sorted(model.labels.begin(), model.labels.end()) ||
      std::adjacent_find(model.labels.begin(), model.labels.end()) != model.labels.end()) {
    fail(ErrorKind::format, path.string() + ": class labels must be sorted and distinct");
  }
  if (!model.weights.allFinite() || !model.biases.allFinite()) fail(ErrorKind::format, path.string() + ": non-finite weight");
  return model;
}

}  // namespace tstdd
