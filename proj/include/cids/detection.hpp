#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "cids/bloom.hpp"
#include "cids/digest.hpp"
#include "cids/exec.hpp"
#include "cids/ledger.hpp"

namespace cids {

namespace flag {
inline constexpr std::uint8_t syn = 1u << 0;
inline constexpr std::uint8_t ack = 1u << 1;
inline constexpr std::uint8_t arp_reply = 1u << 2;
}  // namespace flag

struct EventRecord {
  Tick sim_time = 0;
  NodeId src = 0;
  NodeId dst = 0;
  std::uint16_t dst_port = 0;
  Digest payload_digest{};
  std::uint64_t payload_len = 0;
  std::uint8_t flags = 0;
  NodeId claimed_src_identity = 0;
  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

inline constexpr std::size_t kNumFeatures = 8;

/// Sliding-window traffic features, in order:
///   0 packets per tick, 1 mean payload length, 2 distinct destination ports,
///   3 SYN ratio, 4 duplicate-payload ratio, 5 identity-conflict count,
///   6 distinct destinations, 7 variance of inter-arrival gaps.
using FeatureVector = std::array<double, kNumFeatures>;

enum class Label : int { attack = +1, benign = -1 };

inline int sign(Label l) { return static_cast<int>(l); }

struct LabeledRow {
  FeatureVector x{};
  Label label = Label::benign;
  friend bool operator==(const LabeledRow&, const LabeledRow&) = default;
};

using LabeledDataset = std::vector<LabeledRow>;

struct LinearModel {
  FeatureVector weights{};
  double bias = 0.0;
  FeatureVector feature_means{};
  FeatureVector feature_scales{1, 1, 1, 1, 1, 1, 1, 1};
  Digest training_digest{};
  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

// -- signature engine --------------------------------------------------------

inline constexpr std::size_t kSignatureKeyBytes = 41;

/// dst_port (8 bytes BE) || payload_digest || flags (1 byte). Excludes time
/// and addressing so the same attack payload matches wherever it appears.
Bytes signature_key(const EventRecord& e);
bool sig_match(const BloomFilter& filter, const EventRecord& e);

// -- anomaly engine ----------------------------------------------------------

/// Features over events (sorted by sim_time) spanning window_ticks ticks.
/// An empty window yields the zero vector.
FeatureVector extract_features(std::span<const EventRecord> window, Tick window_ticks);

struct SvmParams {
  double lambda = 0.01;
  std::uint64_t epochs = 20;
  std::uint64_t seed = 0;
};

/// Linear SVM by seeded stochastic subgradient descent on the primal hinge
/// objective with step 1/(lambda t), projecting w onto the 1/sqrt(lambda) ball
/// and returning the averaged iterate. Features are standardized first and the
/// standardization is stored in the model. Throws DegenerateDataset when only
/// one class (or no rows) is present and BadHyperparameter for lambda <= 0 or
/// epochs == 0.
LinearModel svm_train(const LabeledDataset& data, const SvmParams& params);

/// Same as svm_train, additionally recording the primal objective on the
/// standardized training set after every epoch.
LinearModel svm_train_traced(const LabeledDataset& data, const SvmParams& params,
                             std::vector<double>& objective_per_epoch);

struct Prediction {
  Label label;
  double margin;
};

FeatureVector standardize(const LinearModel& model, const FeatureVector& x);

/// Margin exactly 0 is classified as attack.
Prediction svm_predict(const LinearModel& model, const FeatureVector& x);

struct Subgradient {
  FeatureVector w{};
  double b = 0.0;
};

/// Subgradient of (lambda/2)|w|^2 + max(0, 1 - y(w.x + b)) at one sample.
Subgradient hinge_subgradient(const FeatureVector& w, double b, const FeatureVector& x, int y,
                              double lambda);

/// (lambda/2)|w|^2 + mean hinge loss over already-standardized rows.
double primal_objective(const FeatureVector& w, double b, const LabeledDataset& standardized,
                        double lambda);

struct DetectionMetrics {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0, precision = 0, recall = 0, f1 = 0;
};

/// Confusion-matrix metrics from raw counts; 0/0 ratios report 0.
DetectionMetrics metrics_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t tn,
                                     std::uint64_t fn);

/// Attack is the positive class. Throws EmptyHoldout on empty data.
DetectionMetrics evaluate(const LinearModel& model, const LabeledDataset& data,
                          Exec exec = Exec::parallel);

/// Mirror-image model: every label flips (margin 0 aside).
LinearModel negated(const LinearModel& model);

// -- serialization ----------------------------------------------------------

inline constexpr std::size_t kModelBytes = 25 * 8 + 32;

Bytes model_serialize(const LinearModel& model);
/// Throws MalformedBytes unless exactly 232 bytes describing finite values
/// with strictly positive scales.
LinearModel model_deserialize(ByteView bytes);

Bytes dataset_serialize(const LabeledDataset& data);

/// JSON lines: {"features": [8 numbers], "label": 1 | -1}.
void write_dataset_jsonl(const LabeledDataset& data, std::ostream& out);
LabeledDataset read_dataset_jsonl(std::istream& in);

}  // namespace cids
