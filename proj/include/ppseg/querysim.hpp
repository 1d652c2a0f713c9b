// Copyright 2026 The ppseg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Forward-only numeric model of the unified thing/stuff/part query decoder:
// mask grouping with gated dynamic update and self-attention (v1), and
// global-then-part masked cross attention (v2), on synthetic features.

#ifndef PPSEG_QUERYSIM_HPP_
#define PPSEG_QUERYSIM_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ppseg::sim {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Attention logits of masked-out positions.
inline constexpr double kMaskedLogit = -1e9;

// H x W x d features stored as an (H*W) x d matrix, one row per pixel in
// row-major order.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int height, int width, int channels);
  FeatureMap(int height, int width, Matrix pixels);  // kShapeMismatch on bad row count

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return static_cast<int>(pixels_.cols()); }
  Eigen::Index pixel_count() const { return pixels_.rows(); }

  const Matrix& pixels() const { return pixels_; }
  Matrix& mutable_pixels() { return pixels_; }
  auto pixel(int y, int x) const { return pixels_.row(static_cast<Eigen::Index>(y) * width_ + x); }
  auto pixel(int y, int x) { return pixels_.row(static_cast<Eigen::Index>(y) * width_ + x); }

 private:
  int height_ = 0;
  int width_ = 0;
  Matrix pixels_;
};

// Unified query matrix with contiguous thing, stuff and part sections.
struct QuerySet {
  int n_thing = 0;
  int n_stuff = 0;
  int n_part = 0;
  Matrix rows;  // (n_thing + n_stuff + n_part) x d

  // kShapeMismatch if the row count disagrees with the section sizes.
  static QuerySet Create(int n_thing, int n_stuff, int n_part, Matrix rows);

  int size() const { return n_thing + n_stuff + n_part; }
  int dim() const { return static_cast<int>(rows.cols()); }
  int scene_count() const { return n_thing + n_stuff; }
  auto scene() const { return rows.topRows(scene_count()); }
  auto parts() const { return rows.bottomRows(n_part); }

  bool SameSections(const QuerySet& other) const {
    return n_thing == other.n_thing && n_stuff == other.n_stuff && n_part == other.n_part;
  }
};

// N x (H*W) mask logits; sigmoid gives mask probabilities.
struct MaskLogits {
  int height = 0;
  int width = 0;
  Matrix logits;
};

// Per-pixel displacement in target pixels; (H*W) x 2 with columns (dx, dy).
struct FlowField {
  int height = 0;
  int width = 0;
  Matrix flow;
};

struct Linear {
  Matrix weight;  // out x in
  Vector bias;    // out

  Matrix Apply(const Matrix& x) const;
};

struct LayerNorm {
  Vector gamma;
  Vector beta;
  double eps = 1e-5;

  Matrix Apply(const Matrix& x) const;  // normalizes each row
};

// Two fully connected layers with a ReLU between them.
struct Mlp {
  Linear fc1;
  Linear fc2;

  Matrix Apply(const Matrix& x) const;
};

// sigmoid(LayerNorm(FC(x))), elementwise in (0, 1).
struct Gate {
  Linear fc;
  LayerNorm norm;

  Matrix Apply(const Matrix& x) const;
};

struct SelfAttention {
  Linear query, key, value, output;
  int heads = 1;
};

// x -> LayerNorm(x + fc2(relu(fc1(x)))).
struct FeedForward {
  Linear fc1;
  Linear fc2;
  LayerNorm norm;

  Matrix Apply(const Matrix& x) const;
};

struct CrossAttention {
  Mlp query_mlp;  // applied to incoming queries
  Linear key;     // applied to features
  Linear value;   // applied to features
};

// Every weight one decoder stage needs, for either architecture.
struct StageParams {
  int dim = 0;
  int heads = 1;
  int num_classes = 0;
  std::uint64_t seed = 0;

  Gate gate_x;  // weights grouped features
  Gate gate_q;  // weights incoming queries
  SelfAttention self_attention;
  FeedForward ffn;
  CrossAttention global_cross;
  CrossAttention part_cross;
  SelfAttention part_self_attention;
  FeedForward part_ffn;
  Linear mask_projection;  // applied to features; bias stays zero
  Mlp class_head;

  // Uniform in [-1/sqrt(dim), 1/sqrt(dim)] from `seed`; layer norms start at
  // gamma = 1, beta = 0; the mask projection has no bias. kHeadDivisibility unless heads divides dim.
  static StageParams Init(int dim, int heads, int num_classes, std::uint64_t seed);
};

enum class GroupingMode {
  kSoft,       // sigmoid-weighted sum
  kBinarized,  // sum over pixels with sigmoid > 0.5
};

// X_n = Σ_{u,v} σ(M_n(u,v)) F(u,v). `logits` is n x (H*W).
Matrix MaskGrouping(const Matrix& logits, const FeatureMap& features,
                    GroupingMode mode = GroupingMode::kSoft);

struct GateTrace {
  double min = 1.0;
  double max = 0.0;
};

// Q̂ = Gate_x(X) ⊙ X + Gate_q(X) ⊙ Q.
QuerySet DynamicUpdate(const Matrix& grouped, const QuerySet& queries, const StageParams& params,
                       GateTrace* trace = nullptr);

struct AttentionTrace {
  double max_row_sum_error = 0.0;  // max |Σ_j a_ij - 1| over rows
  int fallback_rows = 0;           // masked rows with no allowed position
};

// Multi-head self-attention followed by the feed-forward block:
// FFN(MHSA(x) + x). kHeadDivisibility when heads does not divide d.
Matrix SelfAttentionBlock(const Matrix& x, const SelfAttention& attention,
                          const FeedForward& ffn, AttentionTrace* trace = nullptr);
QuerySet MhsaFfn(const QuerySet& queries, const StageParams& params,
                 AttentionTrace* trace = nullptr);

struct CrossAttentionOptions {
  // Adds the sinusoidal positional encoding to the features feeding K.
  bool positional_keys = true;
};

struct CrossAttentionResult {
  Matrix queries;      // n x d
  Matrix mask_logits;  // n x (H*W), from the refined queries
  Matrix attention;    // n x (H*W) softmax weights
  AttentionTrace trace;
};

// softmax(A + MLP(Q) K(F)^T) V(F) + Q with A = 0 where σ(M_prev) > 0.5 and
// kMaskedLogit elsewhere. Rows with no allowed position attend everywhere.
CrossAttentionResult MaskedCrossAttention(const Matrix& queries, const Matrix& prev_logits,
                                          const FeatureMap& features,
                                          const CrossAttention& block,
                                          const Linear& mask_projection,
                                          const CrossAttentionOptions& options = {});
CrossAttentionResult MaskedCrossAttention(const QuerySet& queries, const MaskLogits& prev,
                                          const FeatureMap& features, const StageParams& params,
                                          const CrossAttentionOptions& options = {});

// Q · (F P^T)^T for one query section, P the mask projection.
Matrix SectionMaskLogits(const Matrix& queries, const FeatureMap& features,
                         const Linear& mask_projection);

struct DecoderState {
  QuerySet queries;
  MaskLogits masks;
};

struct StageTrace {
  GateTrace gates;           // v1 only
  AttentionTrace attention;  // all softmax layers of the stage
  bool has_gates = false;
};

struct StageResult {
  DecoderState state;
  StageTrace trace;
};

struct V1Options {
  GroupingMode grouping = GroupingMode::kSoft;
};

// Joint query reasoning with decoupled features: group thing/stuff queries on
// F_s and part queries on F_p, dynamic update, MHSA + FFN, new masks.
StageResult DecoderStageV1(const DecoderState& state, const FeatureMap& scene,
                           const FeatureMap& part, const StageParams& params,
                           const V1Options& options = {});

struct V2Options {
  bool enable_part_cross = true;
  CrossAttentionOptions cross;
};

// Global masked cross attention of every query on F_s, MHSA + FFN, then part
// masked cross attention of the part queries on F_p with its own MHSA + FFN.
StageResult DecoderStageV2(const DecoderState& state, const FeatureMap& scene,
                           const FeatureMap& part, const StageParams& params,
                           const V2Options& options = {});

struct Prediction {
  MaskLogits masks;
  Matrix class_logits;  // N x num_classes
};

Prediction PredictMasksAndClasses(const QuerySet& queries, const FeatureMap& scene,
                                  const FeatureMap& part, const StageParams& params);

// Bilinear sampling of `low` at (x + dx, y + dy) mapped to the low-res grid
// with half-pixel centers, clamped at the border.
FeatureMap FlowAlignUpsample(const FeatureMap& low, const FlowField& flow, int height,
                             int width);

// Fixed 2-D sinusoidal encoding: the first d/2 channels encode y, the rest x.
// kOddChannels when d is odd.
FeatureMap PositionalEncoding(int height, int width, int channels);

enum class Arch { kV1, kV2 };

struct SimulationConfig {
  std::uint64_t seed = 0;
  int height = 16;
  int width = 16;
  int dim = 32;
  int heads = 4;
  int n_thing = 8;
  int n_stuff = 8;
  int n_part = 8;
  int num_classes = 16;
  int stages = 3;
  Arch arch = Arch::kV2;
  bool enable_part_cross = true;
  bool positional_keys = true;
  GroupingMode grouping = GroupingMode::kSoft;
};

struct SimulationResult {
  FeatureMap scene;
  FeatureMap part;
  std::vector<DecoderState> states;  // initial state, then one per stage
  std::vector<StageTrace> traces;
  Matrix class_logits;
};

// Seeded synthetic features and queries, initial masks from the prediction
// head, then `stages` decoder stages with independently seeded parameters.
SimulationResult RunSimulation(const SimulationConfig& config);

// Runs the stages on caller-supplied inputs.
SimulationResult RunSimulation(const SimulationConfig& config, const FeatureMap& scene,
                               const FeatureMap& part, const QuerySet& initial_queries);

struct InvariantCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;      // measured worst case
  double tolerance = 0.0;
  std::string note;
};

// Softmax row sums, masked-position invariance, per-section permutation
// equivariance, gate range, seed determinism and shape preservation.
std::vector<InvariantCheck> CheckInvariants(const SimulationConfig& config);

}  // namespace ppseg::sim

#endif  // PPSEG_QUERYSIM_HPP_
