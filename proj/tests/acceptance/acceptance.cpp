// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tstdd/classifier.hpp"
#include "tstdd/descriptors.hpp"
#include "tstdd/encoding.hpp"
#include "tstdd/featmaps.hpp"
#include "tstdd/pipeline.hpp"
#include "tstdd/temporal_reps.hpp"

using namespace tstdd;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::mt19937_64 gen(1234);
double uni(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
int uni_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
  std::printf("criterion %d %-28s %s  %s\n", id, name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(const char* pattern, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome ofsdi_closed_form() {
  const auto start = Clock::now();
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int frames = uni_int(3, 50);
    const int w = uni_int(1, 32), h = uni_int(1, 32);
    const double alpha = uni(1e-3, 1.0 - 1e-3);
    std::vector<TemporalImage> planes;
    for (int i = 0; i < frames - 1; ++i) {
      TemporalImage t(w, h, i);
      for (double& v : t.values) v = uni(0, 255);
      planes.push_back(t);
    }
    OfsdiConfig cfg;
    cfg.alpha = alpha;
    const std::vector<TemporalImage> seq = ofsdi_sequence(planes, cfg);
    for (std::size_t k = 1; k < planes.size(); ++k) {
      for (std::size_t p = 0; p < planes[0].values.size(); ++p) {
        double closed = std::pow(alpha, double(k)) * planes[0].values[p];
        for (std::size_t i = 1; i <= k; ++i)
          closed += std::pow(alpha, double(k - i)) * std::abs(planes[i].values[p] - planes[i - 1].values[p]);
        worst = std::max(worst, std::abs(seq[k - 1].values[p] - closed));
      }
    }
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-6 && elapsed < 5.0, fmt("max abs error %.3g, %.2f s", worst, elapsed)};
}

Outcome normalization_contracts() {
  const auto start = Clock::now();
  bool ok = true;
  double worst_scale = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int h = uni_int(1, 8), w = uni_int(1, 8), l = uni_int(1, 6), n = uni_int(1, 6);
    FeatureMapStack s(Stream::local_temporal, "stage1", h, w, l, n, 0.5);
    for (double& v : s.values) v = uni(0, 10) < 2 ? 0.0 : uni(0, 100);
    if (n > 1 && trial % 3 == 0) std::fill_n(s.values.begin(), s.channel_size(), 0.0);  // an all-zero channel
    const FeatureMapStack st = spatiotemporal_normalize(s);
    const FeatureMapStack ch = channel_normalize(s);
    for (int c = 0; c < n; ++c) {
      const auto first = s.values.begin() + std::ptrdiff_t(c * s.channel_size());
      const bool nonzero = *std::max_element(first, first + std::ptrdiff_t(s.channel_size())) > 0;
      const auto nf = st.values.begin() + std::ptrdiff_t(c * s.channel_size());
      const double m = *std::max_element(nf, nf + std::ptrdiff_t(s.channel_size()));
      ok &= nonzero ? m == 1.0 : m == 0.0;
    }
    for (std::size_t pos = 0; pos < s.channel_size(); ++pos) {
      double in_max = 0, out_max = 0;
      for (int c = 0; c < n; ++c) {
        in_max = std::max(in_max, s.values[c * s.channel_size() + pos]);
        out_max = std::max(out_max, ch.values[c * s.channel_size() + pos]);
      }
      ok &= in_max > 0 ? out_max == 1.0 : out_max == 0.0;
    }
    ok &= spatiotemporal_normalize(st).values == st.values;
    ok &= channel_normalize(ch).values == ch.values;
    FeatureMapStack scaled = s;
    const double k = uni(0.01, 100);
    for (double& v : scaled.values) v *= k;
    const FeatureMapStack st2 = spatiotemporal_normalize(scaled), ch2 = channel_normalize(scaled);
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      worst_scale = std::max({worst_scale, std::abs(st2.values[i] - st.values[i]), std::abs(ch2.values[i] - ch.values[i])});
    }
  }
  const double elapsed = seconds_since(start);
  ok &= worst_scale <= 1e-12 && elapsed < 5.0;
  return {ok, fmt("scale deviation %.3g, %.2f s", worst_scale, elapsed)};
}

Outcome pooling_oracle() {
  std::size_t mismatches = 0;
  double worst_linear = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int h = uni_int(2, 10), w = uni_int(2, 10), l = uni_int(15, 20), n = uni_int(1, 8);
    const double ratio = std::ldexp(1.0, -uni_int(0, 3));
    FeatureMapStack a(Stream::global_temporal, "stage1", h, w, l, n, ratio), b = a;
    for (double& v : a.values) v = uni(0, 1);
    for (double& v : b.values) v = uni(0, 1);
    Trajectory t;
    const int z0 = uni_int(0, l - 15);
    for (int p = 0; p < 15; ++p) t.points.push_back({uni(0, w / ratio), uni(0, h / ratio), z0 + p});

    Eigen::VectorXd want = Eigen::VectorXd::Zero(n);
    for (const TrajectoryPoint& p : t.points) {
      const int mx = std::min(int(std::floor(ratio * p.x + 0.5)), w - 1);
      const int my = std::min(int(std::floor(ratio * p.y + 0.5)), h - 1);
      for (int c = 0; c < n; ++c) want[c] += a.values[((std::size_t(c) * l + p.z) * h + my) * w + mx];
    }
    const Eigen::VectorXd got = trajectory_pool(t, a);
    if (got != want) ++mismatches;

    const double ka = uni(-3, 3), kb = uni(-3, 3);
    FeatureMapStack mix = a;
    for (std::size_t i = 0; i < mix.values.size(); ++i) mix.values[i] = ka * a.values[i] + kb * b.values[i];
    const Eigen::VectorXd lin = trajectory_pool(t, mix) - (ka * got + kb * trajectory_pool(t, b));
    worst_linear = std::max(worst_linear, lin.cwiseAbs().maxCoeff());
  }
  return {mismatches == 0 && worst_linear <= 1e-9,
          fmt("%.0f bitwise mismatches, linearity error %.3g", double(mismatches), worst_linear)};
}

Outcome llc_contracts() {
  bool ok = true;
  double worst_sum = 0.0, worst_excess = -1e300;
  std::size_t support_violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = uni_int(8, 64), d = uni_int(2, 16);
    Codebook cb{Eigen::MatrixXd(k, d)};
    for (Eigen::Index i = 0; i < cb.centers.size(); ++i) cb.centers.data()[i] = uni(-1, 1);
    Eigen::VectorXd x(d);
    for (Eigen::Index i = 0; i < d; ++i) x[i] = uni(-1.2, 1.2);
    const LlcConfig cfg;
    const SparseCode code = llc_encode(x, cb, cfg);
    worst_sum = std::max(worst_sum, std::abs(std::accumulate(code.weights.begin(), code.weights.end(), 0.0) - 1.0));

    std::vector<std::pair<double, int>> dist;
    for (int j = 0; j < k; ++j) dist.emplace_back((cb.centers.row(j).transpose() - x).squaredNorm(), j);
    std::sort(dist.begin(), dist.end());
    std::vector<int> nearest;
    for (int j = 0; j < cfg.k_bases; ++j) nearest.push_back(dist[j].second);
    for (int idx : code.indices)
      if (std::find(nearest.begin(), nearest.end(), idx) == nearest.end()) ++support_violations;

    Eigen::VectorXd recon = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i < code.indices.size(); ++i) recon += code.weights[i] * cb.centers.row(code.indices[i]).transpose();
    worst_excess = std::max(worst_excess, (x - recon).norm() - std::sqrt(dist[0].first));
  }
  ok &= worst_sum <= 1e-6 && support_violations == 0 && worst_excess <= 0.0;

  double min_center_weight = 1.0, max_other = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Codebook cb{Eigen::MatrixXd(32, 8)};
    for (Eigen::Index i = 0; i < cb.centers.size(); ++i) cb.centers.data()[i] = uni(-1, 1);
    LlcConfig cfg;
    cfg.lambda = 1e-6;
    const int j = uni_int(0, 31);
    const SparseCode code = llc_encode(cb.centers.row(j).transpose(), cb, cfg);
    for (std::size_t i = 0; i < code.indices.size(); ++i) {
      if (code.indices[i] == j) min_center_weight = std::min(min_center_weight, code.weights[i]);
      else max_other = std::max(max_other, std::abs(code.weights[i]));
    }
    if (std::find(code.indices.begin(), code.indices.end(), j) == code.indices.end()) min_center_weight = 0.0;
  }
  ok &= min_center_weight >= 0.999;
  return {ok, fmt("sum error %.3g, recon minus nearest %.3g, center weight %.6f, other %.3g", worst_sum, worst_excess,
                  min_center_weight, max_other) +
                  (support_violations ? ", support violations" : "")};
}

Outcome pca_whitening() {
  bool ok = true;
  // Rank-1 data.
  Eigen::MatrixXd line(60, 5);
  Eigen::RowVectorXd dir(5);
  dir << 0.3, -1, 2, 0.5, 1;
  for (int i = 0; i < 60; ++i) line.row(i) = Eigen::RowVectorXd::Constant(5, 0.7) + uni(-3, 3) * dir;
  const PcaModel lp = fit_pca(line, 5);
  const int significant = int((lp.explained_variance.array() > 1e-10).count());
  const WhitenModel lw = fit_whitening(line);
  ok &= significant == 1 && lw.output_dim() == 1;

  // Full-basis reconstruction.
  Eigen::MatrixXd x(80, 12);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = uni(-5, 5);
  const PcaModel full = fit_pca(x, 12);
  double worst_recon = 0.0;
  for (int i = 0; i < 80; ++i) {
    const Eigen::VectorXd v = x.row(i).transpose();
    worst_recon = std::max(worst_recon, (full.reconstruct(full.project(v)) - v).norm() / v.norm());
  }
  ok &= worst_recon <= 1e-6;

  // Isotropic cloud.
  std::normal_distribution<double> normal(0.0, 2.0);
  Eigen::MatrixXd cloud(5000, 8);
  for (Eigen::Index i = 0; i < cloud.size(); ++i) cloud.data()[i] = normal(gen);
  const WhitenModel w = fit_whitening(cloud, 0.99);
  const Eigen::MatrixXd y = w.transform_rows(cloud);
  double lo = 1e300, hi = 0.0;
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    const double mean = y.col(j).mean();
    const double var = (y.col(j).array() - mean).square().sum() / double(y.rows() - 1);
    lo = std::min(lo, var);
    hi = std::max(hi, var);
  }
  ok &= lo >= 0.9 && hi <= 1.1 && w.retained_fraction > 0.99;
  return {ok, fmt("rank-1 components %.0f, recon error %.3g, whitened variance [%.4f, %.4f]", significant, worst_recon, lo, hi) +
                  fmt(", retained %.4f", w.retained_fraction)};
}

Outcome svm_contracts() {
  bool ok = true;
  Eigen::MatrixXd x(100, 2);
  std::vector<std::string> labels;
  for (int i = 0; i < 100; ++i) {
    const bool pos = i % 2 == 0;
    x.row(i) << uni(-4, 4), (pos ? 1 : -1) * uni(0.3, 4);
    x(i, 0) += 0.5 * x(i, 1);
    labels.push_back(pos ? "up" : "down");
  }
  const SvmModel m = train_svm(x, labels, SvmConfig{});
  const double acc = evaluate(m, x, labels).accuracy;
  bool monotone = true;
  for (const BinarySvm& b : m.diagnostics)
    for (std::size_t e = 1; e < b.dual_trace.size(); ++e) monotone &= b.dual_trace[e] >= b.dual_trace[e - 1];
  ok &= acc == 1.0 && monotone;

  Eigen::MatrixXd two(2, 2);
  two << -1, 0, 1, 0;
  const std::vector<std::string> ab = {"A", "B"};
  const SvmModel sym = train_svm(two, ab, SvmConfig{});
  double crossing = 0.0;
  for (int c = 0; c < 2; ++c) crossing = std::max(crossing, std::abs(sym.biases[c] / sym.weights(c, 0)));
  ok &= crossing <= 1e-6;

  SvmModel lin;
  lin.labels = {"a", "b", "c", "d"};
  lin.weights.resize(4, 6);
  for (Eigen::Index i = 0; i < lin.weights.size(); ++i) lin.weights.data()[i] = uni(-1, 1);
  lin.biases = Eigen::VectorXd::Zero(4);
  int changed = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::VectorXd v(6);
    for (Eigen::Index i = 0; i < 6; ++i) v[i] = uni(-1, 1);
    const double k = std::exp(uni(-5, 5));
    changed += predict(lin, v).class_index != predict(lin, Eigen::VectorXd(k * v)).class_index;
  }
  ok &= changed == 0;
  return {ok, fmt("train accuracy %.3f, dual monotone %.0f, boundary |x| %.3g, argmax changes %.0f", acc, monotone,
                  crossing, changed)};
}

// ---------------------------------------------------------------------------

PipelineConfig desk_config(const fs::path& cache) {
  PipelineConfig cfg;
  cfg.codebook_size = 64;
  cfg.train_per_class = 10;
  cfg.repeats = 5;
  cfg.seed = 7;
  cfg.cache_dir = cache;
  return cfg;
}

void synthesize(const fs::path& root, std::uint64_t seed) {
  for (MotionClass c : kAllMotionClasses)
    for (int i = 0; i < 20; ++i) {
      const VideoClip clip = synth_generate(c, seed + static_cast<std::uint64_t>(i));
      save_frame_sequence(clip, root / std::string(to_string(c)) / clip.id);
    }
}

std::map<std::string, std::string> read_dir_bytes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    out[e.path().filename().string()] = std::string(std::istreambuf_iterator<char>(in), {});
  }
  return out;
}

std::string accuracies(const RunReport& r) {
  std::string s;
  for (const RepeatResult& rep : r.repeats) s += fmt(" %.2f", 100.0 * rep.accuracy);
  return s;
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / ("tstdd_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(work);
  fs::create_directories(work);

  try {
    report(1, "ofsdi-closed-form", ofsdi_closed_form());
    report(2, "normalization", normalization_contracts());
    report(3, "pooling-oracle", pooling_oracle());
    report(4, "llc", llc_contracts());
    report(5, "pca-whitening", pca_whitening());
    report(6, "svm", svm_contracts());

    const fs::path data = work / "data";
    const PipelineConfig cfg = desk_config(work / "cache_a");
    const auto start = Clock::now();
    synthesize(data, cfg.seed);
    const RunReport three = run_evaluate(data, cfg, &std::cerr);
    const double elapsed = seconds_since(start);
    report(7, "end-to-end",
           {three.mean_accuracy >= 0.90 && elapsed < 600.0,
            fmt("mean %.2f%% over %.0f repeats, %.1f s", 100.0 * three.mean_accuracy, double(three.repeats.size()),
                elapsed) +
                ", per repeat" + accuracies(three) + fmt(", %.0f videos, Dim %.0f", double(three.videos), double(three.tstdd_dim))});

    const AblationReport ab = run_ablation(data, cfg, &std::cerr);
    std::map<std::string, const RunReport*> rows;
    for (const auto& [name, r] : ab.rows) rows[name] = &r;
    const RunReport& all = *rows.at("lt+st+gt");
    const RunReport& pair = *rows.at("lt+st");
    const double best_single = std::max({rows.at("lt")->mean_accuracy, rows.at("st")->mean_accuracy, rows.at("gt")->mean_accuracy});
    int beats_pair = 0;
    for (std::size_t r = 0; r < all.repeats.size(); ++r) beats_pair += all.repeats[r].accuracy > pair.repeats[r].accuracy;
    const bool pair_rule = beats_pair >= 3 || std::abs(all.mean_accuracy - pair.mean_accuracy) <= 0.01;
    std::string detail;
    for (const auto& [name, r] : ab.rows) detail += name + fmt(" %.2f%% ", 100.0 * r.mean_accuracy);
    detail += fmt("| beats lt+st on %.0f of 5 repeats", beats_pair);
    report(8, "ablation-trend", {all.mean_accuracy >= best_single - 0.01 && pair_rule, detail});

    const PipelineConfig cfg_b = desk_config(work / "cache_b");
    const RunReport again = run_evaluate(data, cfg_b, &std::cerr);
    const auto cache_a = read_dir_bytes(cfg.cache_dir);
    const auto cache_b = read_dir_bytes(cfg_b.cache_dir);
    bool same_acc = again.repeats.size() == three.repeats.size();
    for (std::size_t r = 0; same_acc && r < three.repeats.size(); ++r) same_acc = again.repeats[r].accuracy == three.repeats[r].accuracy;
    report(9, "determinism",
           {cache_a == cache_b && same_acc && !cache_a.empty(),
            fmt("%.0f cache files, caches identical %.0f, accuracies identical %.0f", double(cache_a.size()),
                cache_a == cache_b, same_acc)});
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    ++failures;
  }

  fs::remove_all(work);
  std::printf("%s: %d criterion failure(s)\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
