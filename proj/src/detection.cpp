#include "cids/detection.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <set>

#include "cids/encoding.hpp"
#include "cids/error.hpp"
#include "json.hpp"

namespace cids {

Bytes signature_key(const EventRecord& e) {
  ByteWriter w;
  w.u64(e.dst_port);
  w.digest(e.payload_digest);
  w.u8(e.flags);
  return std::move(w).take();
}

bool sig_match(const BloomFilter& filter, const EventRecord& e) {
  return filter.query(signature_key(e));
}

FeatureVector extract_features(std::span<const EventRecord> window, Tick window_ticks) {
  FeatureVector f{};
  if (window.empty()) return f;
  const double n = static_cast<double>(window.size());

  std::set<std::uint16_t> ports;
  std::set<Digest> payloads;
  std::set<NodeId> dsts;
  double len_sum = 0;
  std::uint64_t syn = 0;
  std::uint64_t conflicts = 0;
  for (const auto& e : window) {
    ports.insert(e.dst_port);
    payloads.insert(e.payload_digest);
    dsts.insert(e.dst);
    len_sum += static_cast<double>(e.payload_len);
    if (e.flags & flag::syn) ++syn;
    if (e.claimed_src_identity != e.src) ++conflicts;
  }

  double gap_var = 0;
  if (window.size() >= 2) {
    const double g = static_cast<double>(window.size() - 1);
    double mean = 0;
    for (std::size_t i = 1; i < window.size(); ++i)
      mean += static_cast<double>(window[i].sim_time - window[i - 1].sim_time);
    mean /= g;
    for (std::size_t i = 1; i < window.size(); ++i) {
      const double d = static_cast<double>(window[i].sim_time - window[i - 1].sim_time) - mean;
      gap_var += d * d;
    }
    gap_var /= g;
  }

  f[0] = n / static_cast<double>(std::max<Tick>(window_ticks, 1));
  f[1] = len_sum / n;
  f[2] = static_cast<double>(ports.size());
  f[3] = static_cast<double>(syn) / n;
  f[4] = 1.0 - static_cast<double>(payloads.size()) / n;
  f[5] = static_cast<double>(conflicts);
  f[6] = static_cast<double>(dsts.size());
  f[7] = gap_var;
  return f;
}

FeatureVector standardize(const LinearModel& model, const FeatureVector& x) {
  FeatureVector z{};
  for (std::size_t j = 0; j < kNumFeatures; ++j)
    z[j] = (x[j] - model.feature_means[j]) / model.feature_scales[j];
  return z;
}

namespace {

double dot(const FeatureVector& a, const FeatureVector& b) {
  double s = 0;
  for (std::size_t j = 0; j < kNumFeatures; ++j) s += a[j] * b[j];
  return s;
}

void check_training_inputs(const LabeledDataset& data, const SvmParams& p) {
  if (!(p.lambda > 0.0) || !std::isfinite(p.lambda))
    throw Error(ErrorCode::bad_hyperparameter, "lambda must be positive and finite");
  if (p.epochs == 0) throw Error(ErrorCode::bad_hyperparameter, "epochs must be >= 1");
  bool pos = false, neg = false;
  for (const auto& r : data) (r.label == Label::attack ? pos : neg) = true;
  if (!pos || !neg) throw Error(ErrorCode::degenerate_dataset, "training needs both labels");
}

LinearModel train_impl(const LabeledDataset& data, const SvmParams& p,
                       std::vector<double>* trace) {
  check_training_inputs(data, p);
  LinearModel model;
  const double n = static_cast<double>(data.size());

  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    double mean = 0;
    for (const auto& r : data) mean += r.x[j];
    mean /= n;
    double var = 0;
    for (const auto& r : data) var += (r.x[j] - mean) * (r.x[j] - mean);
    model.feature_means[j] = mean;
    model.feature_scales[j] = std::max(std::sqrt(var / n), 1e-8);
  }

  LabeledDataset z;
  z.reserve(data.size());
  for (const auto& r : data) z.push_back({standardize(model, r.x), r.label});

  std::mt19937_64 rng(p.seed);
  std::vector<std::size_t> order(z.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  // The iterate w is projected onto the ball of radius 1/sqrt(lambda), which
  // contains the optimum; the returned model is the running average of the
  // iterates, which damps the unregularized bias's large early steps.
  const double radius = 1.0 / std::sqrt(p.lambda);
  FeatureVector w{}, w_avg{};
  double b = 0, b_avg = 0;
  std::uint64_t t = 0;
  for (std::uint64_t epoch = 0; epoch < p.epochs; ++epoch) {
    // Fisher-Yates on raw engine output keeps the order independent of the
    // standard library's distribution implementations.
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    for (std::size_t idx : order) {
      ++t;
      const double eta = 1.0 / (p.lambda * static_cast<double>(t));
      const auto& row = z[idx];
      Subgradient g = hinge_subgradient(w, b, row.x, sign(row.label), p.lambda);
      for (std::size_t j = 0; j < kNumFeatures; ++j) w[j] -= eta * g.w[j];
      b -= eta * g.b;
      if (const double norm = std::sqrt(dot(w, w)); norm > radius)
        for (auto& v : w) v *= radius / norm;
      const double inv_t = 1.0 / static_cast<double>(t);
      for (std::size_t j = 0; j < kNumFeatures; ++j) w_avg[j] += (w[j] - w_avg[j]) * inv_t;
      b_avg += (b - b_avg) * inv_t;
    }
    if (trace) trace->push_back(primal_objective(w_avg, b_avg, z, p.lambda));
  }

  model.weights = w_avg;
  model.bias = b_avg;
  model.training_digest = sha256(dataset_serialize(data));
  return model;
}

}  // namespace

LinearModel svm_train(const LabeledDataset& data, const SvmParams& params) {
  return train_impl(data, params, nullptr);
}

LinearModel svm_train_traced(const LabeledDataset& data, const SvmParams& params,
                             std::vector<double>& objective_per_epoch) {
  objective_per_epoch.clear();
  return train_impl(data, params, &objective_per_epoch);
}

Prediction svm_predict(const LinearModel& model, const FeatureVector& x) {
  const double margin = dot(model.weights, standardize(model, x)) + model.bias;
  return {margin >= 0.0 ? Label::attack : Label::benign, margin};
}

Subgradient hinge_subgradient(const FeatureVector& w, double b, const FeatureVector& x, int y,
                              double lambda) {
  Subgradient g;
  const bool active = y * (dot(w, x) + b) < 1.0;
  for (std::size_t j = 0; j < kNumFeatures; ++j) g.w[j] = lambda * w[j] - (active ? y * x[j] : 0.0);
  g.b = active ? -static_cast<double>(y) : 0.0;
  return g;
}

double primal_objective(const FeatureVector& w, double b, const LabeledDataset& standardized,
                        double lambda) {
  double hinge = 0;
  for (const auto& r : standardized)
    hinge += std::max(0.0, 1.0 - sign(r.label) * (dot(w, r.x) + b));
  return 0.5 * lambda * dot(w, w) + hinge / static_cast<double>(standardized.size());
}

DetectionMetrics metrics_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t tn,
                                     std::uint64_t fn) {
  auto ratio = [](double num, double den) { return den > 0 ? num / den : 0.0; };
  DetectionMetrics m{tp, fp, tn, fn};
  m.accuracy = ratio(double(tp + tn), double(tp + fp + tn + fn));
  m.precision = ratio(double(tp), double(tp + fp));
  m.recall = ratio(double(tp), double(tp + fn));
  m.f1 = ratio(2 * m.precision * m.recall, m.precision + m.recall);
  return m;
}

DetectionMetrics evaluate(const LinearModel& model, const LabeledDataset& data, Exec exec) {
  if (data.empty()) throw Error(ErrorCode::empty_holdout, "cannot evaluate on an empty dataset");
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  const auto n = static_cast<std::int64_t>(data.size());
  auto tally = [&](std::int64_t i, std::uint64_t& tp_, std::uint64_t& fp_, std::uint64_t& tn_,
                   std::uint64_t& fn_) {
    const bool predicted = svm_predict(model, data[i].x).label == Label::attack;
    const bool actual = data[i].label == Label::attack;
    (predicted ? (actual ? tp_ : fp_) : (actual ? fn_ : tn_)) += 1;
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for reduction(+ : tp, fp, tn, fn) schedule(static)
    for (std::int64_t i = 0; i < n; ++i) tally(i, tp, fp, tn, fn);
  } else {
    for (std::int64_t i = 0; i < n; ++i) tally(i, tp, fp, tn, fn);
  }
  return metrics_from_counts(tp, fp, tn, fn);
}

LinearModel negated(const LinearModel& model) {
  LinearModel out = model;
  for (auto& w : out.weights) w = -w;
  out.bias = -out.bias;
  return out;
}

Bytes model_serialize(const LinearModel& model) {
  ByteWriter w;
  for (double v : model.weights) w.f64(v);
  w.f64(model.bias);
  for (double v : model.feature_means) w.f64(v);
  for (double v : model.feature_scales) w.f64(v);
  w.digest(model.training_digest);
  return std::move(w).take();
}

LinearModel model_deserialize(ByteView bytes) {
  if (bytes.size() != kModelBytes)
    throw Error(ErrorCode::malformed_bytes,
                "model blob must be 232 bytes, got " + std::to_string(bytes.size()));
  ByteReader r(bytes);
  LinearModel m;
  auto finite = [&r] {
    double v = r.f64();
    if (!std::isfinite(v)) throw Error(ErrorCode::malformed_bytes, "non-finite model value");
    return v;
  };
  for (double& v : m.weights) v = finite();
  m.bias = finite();
  for (double& v : m.feature_means) v = finite();
  for (double& v : m.feature_scales) {
    v = finite();
    if (!(v > 0)) throw Error(ErrorCode::malformed_bytes, "feature scale must be positive");
  }
  m.training_digest = r.digest();
  return m;
}

Bytes dataset_serialize(const LabeledDataset& data) {
  ByteWriter w;
  w.u64(data.size());
  for (const auto& r : data) {
    for (double v : r.x) w.f64(v);
    w.u8(r.label == Label::attack ? 1 : 0);
  }
  return std::move(w).take();
}

void write_dataset_jsonl(const LabeledDataset& data, std::ostream& out) {
  for (const auto& r : data) {
    nlohmann::json j;
    j["features"] = r.x;
    j["label"] = sign(r.label);
    out << j.dump() << '\n';
  }
}

LabeledDataset read_dataset_jsonl(std::istream& in) {
  LabeledDataset data;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      LabeledRow row;
      auto feats = j.at("features").get<std::vector<double>>();
      if (feats.size() != kNumFeatures)
        throw Error(ErrorCode::malformed_bytes, "expected 8 features per row");
      std::copy(feats.begin(), feats.end(), row.x.begin());
      const int label = j.at("label").get<int>();
      if (label != 1 && label != -1) throw Error(ErrorCode::malformed_bytes, "label must be +1/-1");
      row.label = static_cast<Label>(label);
      data.push_back(row);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::malformed_bytes, e.what());
    }
  }
  return data;
}

}  // namespace cids
