#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace tstdd {

struct SvmConfig {
  double c = 30.0;
  double tolerance = 1e-4;  // max projected-gradient violation at termination
  int max_epochs = 1000;

  void validate() const;
};

struct BinarySvm {
  Eigen::VectorXd w;
  double b = 0.0;
  std::vector<double> dual_trace;  // dual objective after each epoch
  double primal = 0.0;
  double dual = 0.0;
  int epochs = 0;
  bool converged = false;

  double relative_gap() const;
};

/// L2-regularized hinge loss by dual coordinate descent. The bias is an extra feature fixed
/// at 1 and is regularized like the weights. Labels are +1 / -1.
BinarySvm train_binary_svm(const Eigen::MatrixXd& x, std::span<const int> y, const SvmConfig& cfg);

struct SvmModel {
  std::vector<std::string> labels;
  Eigen::MatrixXd weights;  // classes x d
  Eigen::VectorXd biases;
  double c = 0.0;
  std::vector<BinarySvm> diagnostics;  // empty for a loaded model

  std::size_t num_classes() const { return labels.size(); }
  Eigen::Index dim() const { return weights.cols(); }
};

/// One-vs-rest training. Class order is the sorted order of the distinct labels.
SvmModel train_svm(const Eigen::MatrixXd& features, std::span<const std::string> labels, const SvmConfig& cfg,
                   int threads = 1);

struct Prediction {
  std::size_t class_index = 0;
  Eigen::VectorXd scores;
};

/// argmax of w_c . x + b_c; the lowest class index wins ties.
Prediction predict(const SvmModel& model, const Eigen::VectorXd& x);

struct Evaluation {
  double accuracy = 0.0;
  Eigen::MatrixXi confusion;  // rows: true class, columns: predicted class
  std::vector<double> per_class_accuracy;
};

Evaluation evaluate(const SvmModel& model, const Eigen::MatrixXd& features, std::span<const std::string> labels);

// "LSVM": u32 classes, u32 d, f64 C, then per class: text label, f64 w[d], f64 b.
void save_svm(const std::filesystem::path& path, const SvmModel& model);
SvmModel load_svm(const std::filesystem::path& path);

}  // namespace tstdd
