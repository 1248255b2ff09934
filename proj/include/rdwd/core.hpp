#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

// Domain types for labeled simplex data: normalization, sphere models, and
// signed-distance classification. Everything here is immutable after
// construction and safe to share across threads.

namespace rdwd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct NegativeEntry : std::runtime_error {
  explicit NegativeEntry(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroPositiveSample : std::runtime_error {
  explicit ZeroPositiveSample(const std::string& what) : std::runtime_error(what) {}
};

// Raw nonnegative counts, before normalization.
struct FeatureVector {
  std::vector<double> entries;

  bool is_zero() const {
    for (double e : entries)
      if (e != 0.0) return false;
    return true;
  }
};

// A point on the unit simplex (entries >= 0, summing to 1 within 1e-12).
struct SimplexVector {
  Vector entries;

  Eigen::Index dim() const { return entries.size(); }
};

// Tagged stand-in for a normalized zero vector. Deliberately not a NaN: the
// "signed distance -inf, label -1" contract must survive serialization.
struct ZeroVectorSentinel {};

using NormalizedSample = std::variant<SimplexVector, ZeroVectorSentinel>;

// v / sum(v); the zero vector maps to the sentinel (classify-as-negative).
inline NormalizedSample l1_normalize(const FeatureVector& v) {
  double sum = 0.0;
  for (std::size_t i = 0; i < v.entries.size(); ++i) {
    const double e = v.entries[i];
    if (e < 0.0)
      throw NegativeEntry("negative entry at index " + std::to_string(i));
    sum += e;
  }
  if (sum == 0.0) return ZeroVectorSentinel{};
  SimplexVector s;
  s.entries.resize(static_cast<Eigen::Index>(v.entries.size()));
  for (std::size_t i = 0; i < v.entries.size(); ++i)
    s.entries[static_cast<Eigen::Index>(i)] = v.entries[i] / sum;
  return s;
}

// Fit-time knobs shared by the radial trainer and the CLI.
struct RdwdConfig {
  std::optional<double> penalty;  // C; empty = derive the data-driven default
  double stop_eps = 1e-4;         // outer-loop stopping threshold on |dObj|
  double step_length = 1e-3;      // trust-region radius for each center step
  int max_outer_iters = 500;
  // Class weights (w+, w-); empty = (n-/n, n+/n), which balances the classes.
  std::optional<std::pair<double, double>> weights;

  enum class Init { MeanPlus, MedianPlus, Explicit };
  Init init_mode = Init::MeanPlus;
  Vector init_center;  // only read when init_mode == Explicit
};

// Labeled training data, stored as columns of a d x n matrix.
struct TrainingSet {
  Matrix X;                    // d x n, each column a SimplexVector
  std::vector<int> labels;     // +1 / -1 per column
  std::vector<int> pos_index;  // columns with label +1
  std::vector<int> neg_index;  // columns with label -1
  int dropped_zero_neg = 0;    // -1-class zero vectors removed before storage

  Eigen::Index dim() const { return X.rows(); }
  Eigen::Index size() const { return X.cols(); }
  int n_pos() const { return static_cast<int>(pos_index.size()); }
  int n_neg() const { return static_cast<int>(neg_index.size()); }

  // Zero vectors may legitimately appear only in the -1 class (they sit at
  // signed distance -inf, always correct there); they are dropped from the
  // fit. A zero vector labeled +1 is corrupt input.
  static TrainingSet from_samples(const std::vector<NormalizedSample>& samples,
                                  const std::vector<int>& labels) {
    if (samples.size() != labels.size())
      throw DimensionMismatch("sample/label count mismatch");
    std::vector<const SimplexVector*> kept;
    std::vector<int> kept_labels;
    int dropped = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (std::holds_alternative<ZeroVectorSentinel>(samples[i])) {
        if (labels[i] == +1)
          throw ZeroPositiveSample("zero vector labeled +1 at row " +
                                   std::to_string(i));
        ++dropped;
        continue;
      }
      kept.push_back(&std::get<SimplexVector>(samples[i]));
      kept_labels.push_back(labels[i]);
    }
    if (kept.empty()) throw DimensionMismatch("no usable training samples");
    const Eigen::Index d = kept.front()->dim();
    TrainingSet ts;
    ts.X.resize(d, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j) {
      if (kept[j]->dim() != d)
        throw DimensionMismatch("inconsistent sample dimension at row " +
                                std::to_string(j));
      ts.X.col(static_cast<Eigen::Index>(j)) = kept[j]->entries;
    }
    ts.labels = kept_labels;
    for (std::size_t j = 0; j < kept_labels.size(); ++j) {
      if (kept_labels[j] != +1 && kept_labels[j] != -1)
        throw DimensionMismatch("label must be +1 or -1 at row " +
                                std::to_string(j));
      (kept_labels[j] == +1 ? ts.pos_index : ts.neg_index)
          .push_back(static_cast<int>(j));
    }
    if (ts.pos_index.empty() || ts.neg_index.empty())
      throw DimensionMismatch("training set needs both classes");
    ts.dropped_zero_neg = dropped;
    return ts;
  }
};

// Fitted separating sphere: inside is class +1.
struct SphereModel {
  Vector center;  // O
  double radius = 0.0;
  RdwdConfig config_snapshot;
  int iterations = 0;     // inner solves spent by the outer loop
  bool converged = true;  // false = iteration cap hit, best-so-far returned
};

struct ScoredSample {
  double signed_distance = 0.0;  // -inf for zero-vector inputs
  int predicted_label = -1;      // +1 iff signed_distance >= 0
  std::optional<double> residual;  // y * signed_distance when y is known
};

inline double signed_distance(const SphereModel& model, const SimplexVector& x) {
  if (x.dim() != model.center.size())
    throw DimensionMismatch("sample dimension " + std::to_string(x.dim()) +
                            " vs model dimension " +
                            std::to_string(model.center.size()));
  return model.radius - (x.entries - model.center).norm();
}

inline double signed_distance(const SphereModel&, const ZeroVectorSentinel&) {
  return -std::numeric_limits<double>::infinity();
}

inline double signed_distance(const SphereModel& model, const NormalizedSample& x) {
  return std::visit([&](const auto& v) { return signed_distance(model, v); }, x);
}

// Boundary ties (signed distance exactly zero) classify as +1.
template <typename Sample>
ScoredSample classify(const SphereModel& model, const Sample& x,
                      std::optional<int> true_label = std::nullopt) {
  ScoredSample out;
  out.signed_distance = signed_distance(model, x);
  out.predicted_label = out.signed_distance >= 0.0 ? +1 : -1;
  if (true_label) out.residual = *true_label * out.signed_distance;
  return out;
}

}  // namespace rdwd
