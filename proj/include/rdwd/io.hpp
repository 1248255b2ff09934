#pragma once

// Text formats: model files, labeled coverage tables, and the numeric
// pieces behind the report command (per-class rates, kernel density
// estimates, deterministic jitter heights).
//
// Model files are plain UTF-8 text with a version header, written with 17
// significant digits so a write/read/write cycle is byte-identical:
//
//   rdwd-model v1              hyperplane-model v1
//   d <int>                    d <int>
//   R <decimal>                beta <decimal>
//   O <index> <decimal>        w <index> <decimal>
//   meta <key> <value>         meta <key> <value>
//
// O / w lines carry only the nonzero entries (0-based indices, ascending).
// Readers reject unknown version headers and malformed lines.
//
// Coverage tables are delimiter-separated text, one sample per row:
//
//   <id><sep><label><sep><f1><sep>...<sep><fd>
//
// where <sep> is a tab if the first line contains one, else a comma, and
// <label> is one of the three tokens +1, -1, unknown.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rdwd/baselines.hpp"
#include "rdwd/core.hpp"
#include "rdwd/rng.hpp"

namespace rdwd::io {

struct ModelReadError : std::runtime_error {
  explicit ModelReadError(const std::string& what)
      : std::runtime_error(what) {}
};

struct TableParseError : std::runtime_error {
  TableParseError(int row_no, const std::string& what)
      : std::runtime_error("row " + std::to_string(row_no) + ": " + what),
        row(row_no) {}
  int row;
};

// 17 significant digits: enough to round-trip any double exactly.
inline std::string fmt17(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline double parse_double(const std::string& token, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw ModelReadError(std::string("bad ") + what + " value '" + token +
                         "'");
  }
  if (used != token.size())
    throw ModelReadError(std::string("bad ") + what + " value '" + token +
                         "'");
  return v;
}

// Shared body of the two model grammars: header already consumed; reads
// `d`, one scalar line named `scalar_key`, sparse `entry_key` lines, and
// trailing meta lines.
struct SparseModelText {
  int d = 0;
  double scalar = 0.0;
  Vector entries;  // dense, zeros filled in
  std::vector<std::pair<std::string, std::string>> meta;
};

inline SparseModelText read_sparse_model(std::istream& in,
                                         const std::string& scalar_key,
                                         const std::string& entry_key) {
  SparseModelText out;
  std::string line;
  bool have_d = false, have_scalar = false;
  int last_index = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "d") {
      if (have_d || !(ls >> out.d) || out.d < 1)
        throw ModelReadError("bad dimension line '" + line + "'");
      out.entries = Vector::Zero(out.d);
      have_d = true;
    } else if (key == scalar_key) {
      std::string token;
      if (have_scalar || !(ls >> token))
        throw ModelReadError("bad " + scalar_key + " line '" + line + "'");
      out.scalar = parse_double(token, scalar_key.c_str());
      have_scalar = true;
    } else if (key == entry_key) {
      int index = -1;
      std::string token;
      if (!have_d || !(ls >> index >> token) || index < 0 || index >= out.d ||
          index <= last_index)
        throw ModelReadError("bad " + entry_key + " line '" + line + "'");
      out.entries[index] = parse_double(token, entry_key.c_str());
      last_index = index;
    } else if (key == "meta") {
      std::string mkey, mval;
      if (!(ls >> mkey >> mval))
        throw ModelReadError("bad meta line '" + line + "'");
      out.meta.emplace_back(mkey, mval);
    } else {
      throw ModelReadError("unrecognized line '" + line + "'");
    }
    std::string extra;
    if (key != "meta" && (ls >> extra))
      throw ModelReadError("trailing tokens on line '" + line + "'");
  }
  if (!have_d || !have_scalar)
    throw ModelReadError("model file is missing d or " + scalar_key);
  return out;
}

}  // namespace detail

// --- sphere model files -----------------------------------------------------------

inline void write_sphere_model(const SphereModel& model, std::ostream& os) {
  os << "rdwd-model v1\n";
  os << "d " << model.center.size() << '\n';
  os << "R " << fmt17(model.radius) << '\n';
  for (Eigen::Index i = 0; i < model.center.size(); ++i)
    if (model.center[i] != 0.0)
      os << "O " << i << ' ' << fmt17(model.center[i]) << '\n';

  const auto& cfg = model.config_snapshot;
  if (cfg.penalty) os << "meta penalty " << fmt17(*cfg.penalty) << '\n';
  os << "meta stop_eps " << fmt17(cfg.stop_eps) << '\n';
  os << "meta step_length " << fmt17(cfg.step_length) << '\n';
  if (cfg.weights) {
    os << "meta weight_pos " << fmt17(cfg.weights->first) << '\n';
    os << "meta weight_neg " << fmt17(cfg.weights->second) << '\n';
  }
  os << "meta init "
     << (cfg.init_mode == RdwdConfig::Init::MedianPlus ? "median" : "mean")
     << '\n';
  os << "meta iterations " << model.iterations << '\n';
  os << "meta converged " << (model.converged ? 1 : 0) << '\n';
}

inline SphereModel read_sphere_model(std::istream& in) {
  const auto text = detail::read_sparse_model(in, "R", "O");
  SphereModel model;
  model.center = text.entries;
  model.radius = text.scalar;
  if (model.radius < 0.0) throw ModelReadError("negative radius");
  for (const auto& [key, value] : text.meta) {
    if (key == "penalty")
      model.config_snapshot.penalty = detail::parse_double(value, "penalty");
    else if (key == "stop_eps")
      model.config_snapshot.stop_eps = detail::parse_double(value, "stop_eps");
    else if (key == "step_length")
      model.config_snapshot.step_length =
          detail::parse_double(value, "step_length");
    else if (key == "weight_pos")
      model.config_snapshot.weights = {
          detail::parse_double(value, "weight_pos"),
          model.config_snapshot.weights ? model.config_snapshot.weights->second
                                        : 0.0};
    else if (key == "weight_neg")
      model.config_snapshot.weights = {
          model.config_snapshot.weights ? model.config_snapshot.weights->first
                                        : 0.0,
          detail::parse_double(value, "weight_neg")};
    else if (key == "init")
      model.config_snapshot.init_mode = value == "median"
                                            ? RdwdConfig::Init::MedianPlus
                                            : RdwdConfig::Init::MeanPlus;
    else if (key == "iterations")
      model.iterations = static_cast<int>(detail::parse_double(value, key.c_str()));
    else if (key == "converged")
      model.converged = value != "0";
    // Unknown meta keys are tolerated for forward compatibility.
  }
  return model;
}

// --- hyperplane model files -------------------------------------------------------

inline void write_hyperplane_model(const baselines::HyperplaneModel& model,
                                   std::ostream& os) {
  os << "hyperplane-model v1\n";
  os << "d " << model.normal.size() << '\n';
  os << "beta " << fmt17(model.intercept) << '\n';
  for (Eigen::Index i = 0; i < model.normal.size(); ++i)
    if (model.normal[i] != 0.0)
      os << "w " << i << ' ' << fmt17(model.normal[i]) << '\n';
  os << "meta method " << baselines::to_string(model.provenance) << '\n';
}

inline baselines::HyperplaneModel read_hyperplane_model(std::istream& in) {
  const auto text = detail::read_sparse_model(in, "beta", "w");
  baselines::HyperplaneModel model;
  model.normal = text.entries;
  model.intercept = text.scalar;
  model.provenance = baselines::HyperplaneFit::MeanDifference;
  for (const auto& [key, value] : text.meta)
    if (key == "method" && value == "ldwd")
      model.provenance = baselines::HyperplaneFit::LinearDwd;
  return model;
}

// --- version dispatch -------------------------------------------------------------

using AnyModel = std::variant<SphereModel, baselines::HyperplaneModel>;

// Reads either model kind, keyed on the version header line.
inline AnyModel read_model(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ModelReadError("empty model file");
  if (header == "rdwd-model v1") return read_sphere_model(in);
  if (header == "hyperplane-model v1") return read_hyperplane_model(in);
  throw ModelReadError("unrecognized model header '" + header + "'");
}

inline int model_dim(const AnyModel& model) {
  return std::visit(
      [](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, SphereModel>)
          return static_cast<int>(m.center.size());
        else
          return static_cast<int>(m.normal.size());
      },
      model);
}

inline ScoredSample classify_any(const AnyModel& model,
                                 const NormalizedSample& x,
                                 std::optional<int> true_label = std::nullopt) {
  return std::visit(
      [&](const auto& m) { return classify(m, x, true_label); }, model);
}

// --- coverage tables --------------------------------------------------------------

struct DataRow {
  std::string id;
  std::optional<int> label;  // +1 / -1; empty = the "unknown" token
  FeatureVector features;
};

// One sample per line: id, label, then d feature values. The delimiter is a
// tab when the first line contains one, else a comma. Row numbers in errors
// are 1-based over all lines.
inline std::vector<DataRow> read_coverage_rows(std::istream& in) {
  std::vector<DataRow> rows;
  std::string line;
  int row_no = 0;
  char sep = 0;
  std::size_t expect_cols = 0;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (sep == 0) sep = line.find('\t') != std::string::npos ? '\t' : ',';

    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      const std::size_t end = line.find(sep, start);
      cols.push_back(line.substr(
          start, end == std::string::npos ? std::string::npos : end - start));
      if (end == std::string::npos) break;
      start = end + 1;
    }
    if (expect_cols == 0) {
      if (cols.size() < 3)
        throw TableParseError(row_no,
                              "need an id, a label, and at least one feature");
      expect_cols = cols.size();
    } else if (cols.size() != expect_cols) {
      throw TableParseError(
          row_no, "expected " + std::to_string(expect_cols) + " columns, got " +
                      std::to_string(cols.size()));
    }

    DataRow row;
    row.id = cols[0];
    if (cols[1] == "+1")
      row.label = +1;
    else if (cols[1] == "-1")
      row.label = -1;
    else if (cols[1] == "unknown")
      row.label = std::nullopt;
    else
      throw TableParseError(row_no, "label must be +1, -1, or unknown (got '" +
                                        cols[1] + "')");

    row.features.entries.reserve(cols.size() - 2);
    for (std::size_t c = 2; c < cols.size(); ++c) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cols[c], &used);
      } catch (const std::exception&) {
        used = std::string::npos;
      }
      if (used != cols[c].size() || !std::isfinite(v))
        throw TableParseError(row_no, "bad feature value '" + cols[c] + "'");
      if (v < 0.0)
        throw TableParseError(row_no,
                              "negative feature value '" + cols[c] + "'");
      row.features.entries.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// Rows -> scoring samples. With normalize = false the features are taken as
// already simplex-normalized; zero rows become the sentinel either way.
inline std::vector<NormalizedSample> to_samples(const std::vector<DataRow>& rows,
                                                bool normalize) {
  std::vector<NormalizedSample> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (normalize) {
      out.push_back(l1_normalize(row.features));
      continue;
    }
    if (row.features.is_zero()) {
      out.push_back(ZeroVectorSentinel{});
      continue;
    }
    SimplexVector s;
    s.entries.resize(static_cast<Eigen::Index>(row.features.entries.size()));
    for (std::size_t i = 0; i < row.features.entries.size(); ++i)
      s.entries[static_cast<Eigen::Index>(i)] = row.features.entries[i];
    out.push_back(std::move(s));
  }
  return out;
}

// Rows -> training set. Every row needs a +1/-1 label here; the row number
// in the error is 1-based like read_coverage_rows.
inline TrainingSet to_training_set(const std::vector<DataRow>& rows,
                                   bool normalize) {
  std::vector<int> labels;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].label)
      throw TableParseError(static_cast<int>(i) + 1,
                            "training rows need a +1 or -1 label");
    labels.push_back(*rows[i].label);
  }
  return TrainingSet::from_samples(to_samples(rows, normalize), labels);
}

// --- report numerics --------------------------------------------------------------

struct ClassRates {
  int n_pos = 0, n_neg = 0;
  int false_neg = 0, false_pos = 0;
  double fn_rate = 0.0, fp_rate = 0.0;
};

inline ClassRates score_rates(const AnyModel& model,
                              const std::vector<NormalizedSample>& samples,
                              const std::vector<int>& labels) {
  if (samples.size() != labels.size())
    throw DimensionMismatch("sample/label count mismatch");
  ClassRates out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto scored = classify_any(model, samples[i], labels[i]);
    if (labels[i] == +1) {
      ++out.n_pos;
      if (scored.predicted_label < 0) ++out.false_neg;
    } else {
      ++out.n_neg;
      if (scored.predicted_label > 0) ++out.false_pos;
    }
  }
  if (out.n_pos > 0)
    out.fn_rate = static_cast<double>(out.false_neg) / out.n_pos;
  if (out.n_neg > 0)
    out.fp_rate = static_cast<double>(out.false_pos) / out.n_neg;
  return out;
}

struct KdeCurve {
  Vector x;        // 512 evaluation points, min - 4h .. max + 4h
  Vector density;  // gaussian kernel density estimate at x
  double bandwidth = 0.0;
};

// Gaussian KDE with Silverman's bandwidth 0.9 min(sd, IQR/1.34) n^{-1/5}.
// Degenerate spreads (a single point, identical values) fall back to a small
// fixed bandwidth so the curve stays integrable.
inline KdeCurve silverman_kde(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("kde needs data");
  const auto n = static_cast<double>(values.size());

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;

  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    const double pos = q * (n - 1.0);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
  };
  const double iqr = quantile(0.75) - quantile(0.25);

  double spread = std::min(sd, iqr / 1.34);
  if (spread <= 0.0) spread = std::max(sd, iqr / 1.34);
  double h = 0.9 * spread * std::pow(n, -0.2);
  if (!(h > 0.0)) h = 1e-3 * std::max(1.0, std::abs(mean));

  KdeCurve out;
  out.bandwidth = h;
  const int points = 512;
  const double lo = values.front() - 4.0 * h;
  const double hi = values.back() + 4.0 * h;
  out.x.resize(points);
  out.density.resize(points);
  const double norm = 1.0 / (n * h * std::sqrt(2.0 * M_PI));
  for (int i = 0; i < points; ++i) {
    const double xi = lo + (hi - lo) * i / (points - 1);
    out.x[i] = xi;
    double acc = 0.0;
    for (double v : values) {
      const double u = (xi - v) / h;
      acc += std::exp(-0.5 * u * u);
    }
    out.density[i] = acc * norm;
  }
  return out;
}

// Deterministic jitter heights in [0, 1) for strip plots: sample i gets the
// i-th draw from a generator derived from the seed.
inline std::vector<double> jitter_heights(std::size_t count,
                                          std::uint64_t seed) {
  rng::Engine eng = rng::substream(seed, 0, 0x6a69747465724aULL);
  std::vector<double> out(count);
  for (auto& v : out) v = eng.uniform();
  return out;
}

}  // namespace rdwd::io
