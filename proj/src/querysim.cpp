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

#include "ppseg/querysim.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>
#include <string>

#include "ppseg/error.hpp"

namespace ppseg::sim {
namespace {

std::string Shape(Eigen::Index rows, Eigen::Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

void RequireShape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw Error(ErrorCode::kShapeMismatch, std::string(what) + " is " + Shape(m.rows(), m.cols()) +
                                               ", expected " + Shape(rows, cols));
  }
}

void RequireSameGrid(const FeatureMap& a, const FeatureMap& b) {
  if (a.height() != b.height() || a.width() != b.width() || a.channels() != b.channels()) {
    throw Error(ErrorCode::kShapeMismatch, "scene and part features disagree in shape");
  }
}

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Matrix Relu(const Matrix& x) { return x.cwiseMax(0.0); }

// Row-wise softmax in place; records the worst row-sum deviation.
void SoftmaxRows(Matrix& s, AttentionTrace* trace) {
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double peak = s.row(i).maxCoeff();
    s.row(i) = (s.row(i).array() - peak).exp();
    s.row(i) /= s.row(i).sum();
    if (trace) {
      trace->max_row_sum_error =
          std::max(trace->max_row_sum_error, std::abs(s.row(i).sum() - 1.0));
    }
  }
}

void MergeTrace(AttentionTrace& into, const AttentionTrace& from) {
  into.max_row_sum_error = std::max(into.max_row_sum_error, from.max_row_sum_error);
  into.fallback_rows += from.fallback_rows;
}

std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Init {
 public:
  Init(std::uint64_t seed, int dim) : rng_(seed), bound_(1.0 / std::sqrt(double(dim))) {}

  Matrix Uniform(Eigen::Index rows, Eigen::Index cols, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix m(rows, cols);
    // Fill in row-major order so the stream layout is independent of storage.
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng_);
    }
    return m;
  }

  Linear Dense(int out, int in) {
    Linear l;
    l.weight = Uniform(out, in, bound_);
    l.bias = Uniform(out, 1, bound_).col(0);
    return l;
  }

  LayerNorm Norm(int dim) { return {Vector::Ones(dim), Vector::Zero(dim)}; }

  Mlp TwoLayer(int hidden, int out, int in) { return {Dense(hidden, in), Dense(out, hidden)}; }

  SelfAttention Attention(int dim, int heads) {
    SelfAttention a;
    a.query = Dense(dim, dim);
    a.key = Dense(dim, dim);
    a.value = Dense(dim, dim);
    a.output = Dense(dim, dim);
    a.heads = heads;
    return a;
  }

  FeedForward Ffn(int dim) { return {Dense(2 * dim, dim), Dense(dim, 2 * dim), Norm(dim)}; }

  CrossAttention Cross(int dim) { return {TwoLayer(dim, dim, dim), Dense(dim, dim), Dense(dim, dim)}; }

 private:
  std::mt19937_64 rng_;
  double bound_;
};

Matrix MultiHeadAttention(const Matrix& x, const SelfAttention& a, AttentionTrace* trace) {
  const Eigen::Index d = x.cols();
  if (a.heads <= 0 || d % a.heads != 0) {
    throw Error(ErrorCode::kHeadDivisibility,
                std::to_string(d) + " channels over " + std::to_string(a.heads) + " heads");
  }
  const Matrix q = a.query.Apply(x), k = a.key.Apply(x), v = a.value.Apply(x);
  const Eigen::Index dh = d / a.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Matrix heads(x.rows(), d);
  for (int h = 0; h < a.heads; ++h) {
    Matrix w = q.middleCols(h * dh, dh) * k.middleCols(h * dh, dh).transpose() * scale;
    SoftmaxRows(w, trace);
    heads.middleCols(h * dh, dh) = w * v.middleCols(h * dh, dh);
  }
  return a.output.Apply(heads);
}

// Allowed-position mask of one row: σ(logit) > 0.5.
bool Allowed(double logit) { return Sigmoid(logit) > 0.5; }

Matrix Stack(const Matrix& top, const Matrix& bottom) {
  Matrix out(top.rows() + bottom.rows(), std::max(top.cols(), bottom.cols()));
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

void CheckState(const DecoderState& state, const FeatureMap& scene, const FeatureMap& part,
                int dim) {
  RequireSameGrid(scene, part);
  if (scene.channels() != dim) {
    throw Error(ErrorCode::kShapeMismatch, "features have " + std::to_string(scene.channels()) +
                                               " channels, parameters " + std::to_string(dim));
  }
  RequireShape(state.queries.rows, state.queries.size(), dim, "queries");
  RequireShape(state.masks.logits, state.queries.size(), scene.pixel_count(), "mask logits");
}

MaskLogits SectionMasks(const QuerySet& q, const FeatureMap& scene, const FeatureMap& part,
                        const Linear& projection) {
  MaskLogits m{scene.height(), scene.width(), Matrix(q.size(), scene.pixel_count())};
  m.logits.topRows(q.scene_count()) = SectionMaskLogits(q.scene(), scene, projection);
  m.logits.bottomRows(q.n_part) = SectionMaskLogits(q.parts(), part, projection);
  return m;
}

}  // namespace

FeatureMap::FeatureMap(int height, int width, int channels)
    : height_(height), width_(width), pixels_(Matrix::Zero(Eigen::Index(height) * width, channels)) {}

FeatureMap::FeatureMap(int height, int width, Matrix pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
  if (pixels_.rows() != Eigen::Index(height) * width) {
    throw Error(ErrorCode::kShapeMismatch, "feature rows " + std::to_string(pixels_.rows()) +
                                               " for a " + std::to_string(height) + "x" +
                                               std::to_string(width) + " grid");
  }
}

QuerySet QuerySet::Create(int n_thing, int n_stuff, int n_part, Matrix rows) {
  if (n_thing < 0 || n_stuff < 0 || n_part < 0 || rows.rows() != n_thing + n_stuff + n_part) {
    throw Error(ErrorCode::kShapeMismatch,
                std::to_string(rows.rows()) + " query rows for sections " +
                    std::to_string(n_thing) + "+" + std::to_string(n_stuff) + "+" +
                    std::to_string(n_part));
  }
  return {n_thing, n_stuff, n_part, std::move(rows)};
}

Matrix Linear::Apply(const Matrix& x) const {
  RequireShape(x, x.rows(), weight.cols(), "linear input");
  Matrix y = x * weight.transpose();
  y.rowwise() += bias.transpose();
  return y;
}

Matrix LayerNorm::Apply(const Matrix& x) const {
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mean = x.row(i).mean();
    const double var = (x.row(i).array() - mean).square().mean();
    y.row(i) = ((x.row(i).array() - mean) / std::sqrt(var + eps)) * gamma.transpose().array() +
               beta.transpose().array();
  }
  return y;
}

Matrix Mlp::Apply(const Matrix& x) const { return fc2.Apply(Relu(fc1.Apply(x))); }

Matrix Gate::Apply(const Matrix& x) const {
  return norm.Apply(fc.Apply(x)).unaryExpr(&Sigmoid);
}

Matrix FeedForward::Apply(const Matrix& x) const {
  return norm.Apply(x + fc2.Apply(Relu(fc1.Apply(x))));
}

StageParams StageParams::Init(int dim, int heads, int num_classes, std::uint64_t seed) {
  if (dim <= 0 || heads <= 0 || dim % heads != 0) {
    throw Error(ErrorCode::kHeadDivisibility,
                std::to_string(dim) + " channels over " + std::to_string(heads) + " heads");
  }
  if (num_classes <= 0) {
    throw Error(ErrorCode::kShapeMismatch, "class count must be positive");
  }
  sim::Init init(seed, dim);
  StageParams p;
  p.dim = dim;
  p.heads = heads;
  p.num_classes = num_classes;
  p.seed = seed;
  p.gate_x = {init.Dense(dim, dim), init.Norm(dim)};
  p.gate_q = {init.Dense(dim, dim), init.Norm(dim)};
  p.self_attention = init.Attention(dim, heads);
  p.ffn = init.Ffn(dim);
  p.global_cross = init.Cross(dim);
  p.part_cross = init.Cross(dim);
  p.part_self_attention = init.Attention(dim, heads);
  p.part_ffn = init.Ffn(dim);
  p.mask_projection = init.Dense(dim, dim);
  p.mask_projection.bias.setZero();
  p.class_head = init.TwoLayer(dim, num_classes, dim);
  return p;
}

Matrix MaskGrouping(const Matrix& logits, const FeatureMap& features, GroupingMode mode) {
  RequireShape(logits, logits.rows(), features.pixel_count(), "mask logits");
  const Matrix weights = mode == GroupingMode::kSoft
                             ? Matrix(logits.unaryExpr(&Sigmoid))
                             : Matrix(logits.unaryExpr([](double x) { return Allowed(x) ? 1.0 : 0.0; }));
  return weights * features.pixels();
}

QuerySet DynamicUpdate(const Matrix& grouped, const QuerySet& queries, const StageParams& params,
                       GateTrace* trace) {
  RequireShape(grouped, queries.size(), queries.dim(), "grouped features");
  const Matrix gx = params.gate_x.Apply(grouped);
  const Matrix gq = params.gate_q.Apply(grouped);
  if (trace && gx.size() > 0) {
    trace->min = std::min({trace->min, gx.minCoeff(), gq.minCoeff()});
    trace->max = std::max({trace->max, gx.maxCoeff(), gq.maxCoeff()});
  }
  QuerySet out = queries;
  out.rows = gx.cwiseProduct(grouped) + gq.cwiseProduct(queries.rows);
  return out;
}

Matrix SelfAttentionBlock(const Matrix& x, const SelfAttention& attention,
                          const FeedForward& ffn, AttentionTrace* trace) {
  if (x.rows() == 0) return x;
  return ffn.Apply(MultiHeadAttention(x, attention, trace) + x);
}

QuerySet MhsaFfn(const QuerySet& queries, const StageParams& params, AttentionTrace* trace) {
  QuerySet out = queries;
  out.rows = SelfAttentionBlock(queries.rows, params.self_attention, params.ffn, trace);
  return out;
}

Matrix SectionMaskLogits(const Matrix& queries, const FeatureMap& features,
                         const Linear& mask_projection) {
  RequireShape(queries, queries.rows(), features.channels(), "queries");
  return queries * mask_projection.Apply(features.pixels()).transpose();
}

CrossAttentionResult MaskedCrossAttention(const Matrix& queries, const Matrix& prev_logits,
                                          const FeatureMap& features,
                                          const CrossAttention& block,
                                          const Linear& mask_projection,
                                          const CrossAttentionOptions& options) {
  RequireShape(queries, queries.rows(), features.channels(), "queries");
  RequireShape(prev_logits, queries.rows(), features.pixel_count(), "previous mask logits");
  CrossAttentionResult r;
  Matrix key_input = features.pixels();
  if (options.positional_keys) {
    key_input += PositionalEncoding(features.height(), features.width(), features.channels()).pixels();
  }
  const Matrix keys = block.key.Apply(key_input);
  const Matrix values = block.value.Apply(features.pixels());
  r.attention = block.query_mlp.Apply(queries) * keys.transpose();
  for (Eigen::Index n = 0; n < r.attention.rows(); ++n) {
    bool any = false;
    for (Eigen::Index j = 0; j < prev_logits.cols() && !any; ++j) any = Allowed(prev_logits(n, j));
    if (!any) {
      ++r.trace.fallback_rows;
      continue;
    }
    for (Eigen::Index j = 0; j < prev_logits.cols(); ++j) {
      if (!Allowed(prev_logits(n, j))) r.attention(n, j) += kMaskedLogit;
    }
  }
  SoftmaxRows(r.attention, &r.trace);
  r.queries = r.attention * values + queries;
  r.mask_logits = SectionMaskLogits(r.queries, features, mask_projection);
  return r;
}

CrossAttentionResult MaskedCrossAttention(const QuerySet& queries, const MaskLogits& prev,
                                          const FeatureMap& features, const StageParams& params,
                                          const CrossAttentionOptions& options) {
  return MaskedCrossAttention(queries.rows, prev.logits, features, params.global_cross,
                              params.mask_projection, options);
}

StageResult DecoderStageV1(const DecoderState& state, const FeatureMap& scene,
                           const FeatureMap& part, const StageParams& params,
                           const V1Options& options) {
  CheckState(state, scene, part, params.dim);
  const QuerySet& q = state.queries;
  const Matrix& m = state.masks.logits;
  const Matrix grouped =
      Stack(MaskGrouping(m.topRows(q.scene_count()), scene, options.grouping),
            MaskGrouping(m.bottomRows(q.n_part), part, options.grouping));

  StageResult r;
  r.trace.has_gates = true;
  const QuerySet updated = DynamicUpdate(grouped, q, params, &r.trace.gates);
  r.state.queries = MhsaFfn(updated, params, &r.trace.attention);
  r.state.masks = SectionMasks(r.state.queries, scene, part, params.mask_projection);
  return r;
}

StageResult DecoderStageV2(const DecoderState& state, const FeatureMap& scene,
                           const FeatureMap& part, const StageParams& params,
                           const V2Options& options) {
  CheckState(state, scene, part, params.dim);
  const QuerySet& q = state.queries;
  StageResult r;

  const CrossAttentionResult global =
      MaskedCrossAttention(q.rows, state.masks.logits, scene, params.global_cross,
                           params.mask_projection, options.cross);
  MergeTrace(r.trace.attention, global.trace);
  QuerySet refined = q;
  refined.rows = SelfAttentionBlock(global.queries, params.self_attention, params.ffn,
                                    &r.trace.attention);

  if (options.enable_part_cross && q.n_part > 0) {
    const CrossAttentionResult local = MaskedCrossAttention(
        refined.parts(), state.masks.logits.bottomRows(q.n_part), part, params.part_cross,
        params.mask_projection, options.cross);
    MergeTrace(r.trace.attention, local.trace);
    refined.rows.bottomRows(q.n_part) = SelfAttentionBlock(
        local.queries, params.part_self_attention, params.part_ffn, &r.trace.attention);
  }

  r.state.queries = std::move(refined);
  r.state.masks = SectionMasks(r.state.queries, scene, part, params.mask_projection);
  return r;
}

Prediction PredictMasksAndClasses(const QuerySet& queries, const FeatureMap& scene,
                                  const FeatureMap& part, const StageParams& params) {
  RequireSameGrid(scene, part);
  RequireShape(queries.rows, queries.size(), scene.channels(), "queries");
  return {SectionMasks(queries, scene, part, params.mask_projection),
          params.class_head.Apply(queries.rows)};
}

FeatureMap FlowAlignUpsample(const FeatureMap& low, const FlowField& flow, int height,
                             int width) {
  const Eigen::Index target = Eigen::Index(height) * width;
  if (flow.height != height || flow.width != width) {
    throw Error(ErrorCode::kShapeMismatch, "flow grid " + Shape(flow.height, flow.width) +
                                               " for target " + Shape(height, width));
  }
  RequireShape(flow.flow, target, 2, "flow");
  if (low.height() <= 0 || low.width() <= 0) {
    throw Error(ErrorCode::kShapeMismatch, "empty low-resolution features");
  }
  const double sx_scale = double(low.width()) / width;
  const double sy_scale = double(low.height()) / height;
  FeatureMap out(height, width, low.channels());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Eigen::Index i = Eigen::Index(y) * width + x;
      const double sx = std::clamp((x + flow.flow(i, 0) + 0.5) * sx_scale - 0.5, 0.0,
                                   double(low.width() - 1));
      const double sy = std::clamp((y + flow.flow(i, 1) + 0.5) * sy_scale - 0.5, 0.0,
                                   double(low.height() - 1));
      const int x0 = static_cast<int>(std::floor(sx)), y0 = static_cast<int>(std::floor(sy));
      const int x1 = std::min(x0 + 1, low.width() - 1), y1 = std::min(y0 + 1, low.height() - 1);
      const double ax = sx - x0, ay = sy - y0;
      out.mutable_pixels().row(i) =
          (1 - ay) * ((1 - ax) * low.pixel(y0, x0) + ax * low.pixel(y0, x1)) +
          ay * ((1 - ax) * low.pixel(y1, x0) + ax * low.pixel(y1, x1));
    }
  }
  return out;
}

FeatureMap PositionalEncoding(int height, int width, int channels) {
  if (channels <= 0 || channels % 2 != 0) {
    throw Error(ErrorCode::kOddChannels, std::to_string(channels) + " channels");
  }
  const int half = channels / 2;
  FeatureMap pe(height, width, channels);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        const int j = c < half ? c : c - half;
        const double pos = c < half ? y : x;
        const double freq = 1.0 / std::pow(10000.0, 2.0 * (j / 2) / half);
        pe.pixel(y, x)(c) = j % 2 == 0 ? std::sin(pos * freq) : std::cos(pos * freq);
      }
    }
  }
  return pe;
}

SimulationResult RunSimulation(const SimulationConfig& config, const FeatureMap& scene,
                               const FeatureMap& part, const QuerySet& initial_queries) {
  if (config.stages < 0) throw Error(ErrorCode::kShapeMismatch, "negative stage count");
  RequireSameGrid(scene, part);
  SimulationResult r;
  r.scene = scene;
  r.part = part;

  const StageParams head =
      StageParams::Init(config.dim, config.heads, config.num_classes, DeriveSeed(config.seed, 1));
  RequireShape(initial_queries.rows, initial_queries.size(), config.dim, "initial queries");
  r.states.push_back({initial_queries, SectionMasks(initial_queries, scene, part, head.mask_projection)});

  const StageParams* last = &head;
  std::vector<StageParams> params;
  params.reserve(config.stages);
  for (int s = 0; s < config.stages; ++s) {
    params.push_back(StageParams::Init(config.dim, config.heads, config.num_classes,
                                       DeriveSeed(config.seed, 2 + s)));
    last = &params.back();
    StageResult stage =
        config.arch == Arch::kV1
            ? DecoderStageV1(r.states.back(), scene, part, *last, {config.grouping})
            : DecoderStageV2(r.states.back(), scene, part, *last,
                             {config.enable_part_cross, {config.positional_keys}});
    r.states.push_back(std::move(stage.state));
    r.traces.push_back(stage.trace);
  }
  r.class_logits = last->class_head.Apply(r.states.back().queries.rows);
  return r;
}

SimulationResult RunSimulation(const SimulationConfig& config) {
  Init draw(DeriveSeed(config.seed, 0), 1);
  const Eigen::Index pixels = Eigen::Index(config.height) * config.width;
  const FeatureMap scene(config.height, config.width, draw.Uniform(pixels, config.dim, 1.0));
  const FeatureMap part(config.height, config.width, draw.Uniform(pixels, config.dim, 1.0));
  const int n = config.n_thing + config.n_stuff + config.n_part;
  const QuerySet queries = QuerySet::Create(config.n_thing, config.n_stuff, config.n_part,
                                            draw.Uniform(n, config.dim, 1.0));
  return RunSimulation(config, scene, part, queries);
}

namespace {

bool BitwiseEqual(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

// Perturbs the feature rows of every pixel the mask row disallows.
FeatureMap PerturbMasked(const FeatureMap& f, const Eigen::RowVectorXd& logits, Init& noise,
                         bool* touched) {
  FeatureMap out = f;
  *touched = false;
  for (Eigen::Index j = 0; j < logits.size(); ++j) {
    if (Allowed(logits(j))) continue;
    out.mutable_pixels().row(j) += noise.Uniform(1, f.channels(), 1.0);
    *touched = true;
  }
  return out;
}

// Worst change of row n of a masked cross attention when the features its
// mask excludes are perturbed. Rows that allow everything, or fall back,
// are skipped because nothing is masked for them.
double CrossInvariance(const Matrix& queries, const Matrix& logits, const FeatureMap& f,
                       const CrossAttention& block, const Linear& projection,
                       const CrossAttentionOptions& options, Init& noise) {
  const Matrix base = MaskedCrossAttention(queries, logits, f, block, projection, options).queries;
  double worst = 0.0;
  for (Eigen::Index n = 0; n < queries.rows(); ++n) {
    bool empty = true;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) empty = empty && !Allowed(logits(n, j));
    if (empty) continue;
    bool touched = false;
    const FeatureMap perturbed = PerturbMasked(f, logits.row(n), noise, &touched);
    if (!touched) continue;
    const Matrix moved =
        MaskedCrossAttention(queries, logits, perturbed, block, projection, options).queries;
    worst = std::max(worst, (moved.row(n) - base.row(n)).cwiseAbs().maxCoeff());
  }
  return worst;
}

double GroupingInvariance(const Matrix& logits, const FeatureMap& f, Init& noise) {
  double worst = 0.0;
  for (Eigen::Index n = 0; n < logits.rows(); ++n) {
    bool touched = false;
    const FeatureMap perturbed = PerturbMasked(f, logits.row(n), noise, &touched);
    if (!touched) continue;
    const Matrix row = logits.row(n);
    const Matrix a = MaskGrouping(row, f, GroupingMode::kBinarized);
    const Matrix b = MaskGrouping(row, perturbed, GroupingMode::kBinarized);
    worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
  }
  return worst;
}

double MaskedInvariance(const SimulationConfig& config, const SimulationResult& run) {
  Init noise(DeriveSeed(config.seed, 1000), 1);
  double worst = 0.0;
  for (int s = 0; s < config.stages; ++s) {
    const DecoderState& state = run.states[s];
    const QuerySet& q = state.queries;
    const Matrix& m = state.masks.logits;
    if (config.arch == Arch::kV1) {
      worst = std::max(worst, GroupingInvariance(m.topRows(q.scene_count()), run.scene, noise));
      worst = std::max(worst, GroupingInvariance(m.bottomRows(q.n_part), run.part, noise));
      continue;
    }
    const StageParams p = StageParams::Init(config.dim, config.heads, config.num_classes,
                                            DeriveSeed(config.seed, 2 + s));
    const CrossAttentionOptions options{config.positional_keys};
    worst = std::max(worst, CrossInvariance(q.rows, m, run.scene, p.global_cross,
                                            p.mask_projection, options, noise));
    if (!config.enable_part_cross || q.n_part == 0) continue;
    const CrossAttentionResult global =
        MaskedCrossAttention(q.rows, m, run.scene, p.global_cross, p.mask_projection, options);
    const Matrix refined = SelfAttentionBlock(global.queries, p.self_attention, p.ffn);
    worst = std::max(worst, CrossInvariance(refined.bottomRows(q.n_part), m.bottomRows(q.n_part),
                                            run.part, p.part_cross, p.mask_projection, options,
                                            noise));
  }
  return worst;
}

std::vector<int> SectionPermutation(const SimulationConfig& config) {
  std::mt19937_64 rng(DeriveSeed(config.seed, 2000));
  std::vector<int> perm(config.n_thing + config.n_stuff + config.n_part);
  std::iota(perm.begin(), perm.end(), 0);
  const int bounds[4] = {0, config.n_thing, config.n_thing + config.n_stuff,
                         static_cast<int>(perm.size())};
  for (int k = 0; k < 3; ++k) std::shuffle(perm.begin() + bounds[k], perm.begin() + bounds[k + 1], rng);
  return perm;
}

Matrix PermuteRows(const Matrix& m, const std::vector<int>& perm) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) out.row(i) = m.row(perm[i]);
  return out;
}

double Equivariance(const SimulationConfig& config, const SimulationResult& run) {
  const std::vector<int> perm = SectionPermutation(config);
  QuerySet permuted = run.states.front().queries;
  permuted.rows = PermuteRows(permuted.rows, perm);
  const SimulationResult other = RunSimulation(config, run.scene, run.part, permuted);
  double worst = 0.0;
  for (std::size_t s = 0; s < run.states.size(); ++s) {
    const DecoderState& a = run.states[s];
    const DecoderState& b = other.states[s];
    worst = std::max(worst, (PermuteRows(a.queries.rows, perm) - b.queries.rows).cwiseAbs().maxCoeff());
    worst = std::max(worst, (PermuteRows(a.masks.logits, perm) - b.masks.logits).cwiseAbs().maxCoeff());
  }
  return std::max(worst,
                  (PermuteRows(run.class_logits, perm) - other.class_logits).cwiseAbs().maxCoeff());
}

}  // namespace

std::vector<InvariantCheck> CheckInvariants(const SimulationConfig& config) {
  const SimulationResult run = RunSimulation(config);
  std::vector<InvariantCheck> checks;

  double softmax = 0.0;
  for (const StageTrace& t : run.traces) softmax = std::max(softmax, t.attention.max_row_sum_error);
  checks.push_back({"softmax_row_sums", softmax <= 1e-12, softmax, 1e-12, ""});

  const double masked = MaskedInvariance(config, run);
  checks.push_back({"masked_invariance", masked <= 1e-9, masked, 1e-9,
                    config.arch == Arch::kV1 ? "probed on binarized grouping" : ""});

  const double equivariance = Equivariance(config, run);
  checks.push_back({"permutation_equivariance", equivariance <= 1e-6, equivariance, 1e-6, ""});

  if (config.arch == Arch::kV1) {
    double lo = 1.0, hi = 0.0;
    for (const StageTrace& t : run.traces) {
      lo = std::min(lo, t.gates.min);
      hi = std::max(hi, t.gates.max);
    }
    const bool ok = config.stages == 0 || (lo > 0.0 && hi < 1.0);
    checks.push_back({"gate_range", ok, std::min(lo, 1.0 - hi), 0.0, ""});
  } else {
    checks.push_back({"gate_range", true, 0.0, 0.0, "no gates in this architecture"});
  }

  const SimulationResult again = RunSimulation(config);
  bool same = BitwiseEqual(run.class_logits, again.class_logits);
  for (std::size_t s = 0; s < run.states.size(); ++s) {
    same = same && BitwiseEqual(run.states[s].queries.rows, again.states[s].queries.rows) &&
           BitwiseEqual(run.states[s].masks.logits, again.states[s].masks.logits);
  }
  checks.push_back({"seed_determinism", same, same ? 0.0 : 1.0, 0.0, ""});

  bool shapes = true;
  const Eigen::Index n = run.states.front().queries.size();
  for (const DecoderState& s : run.states) {
    shapes = shapes && s.queries.rows.rows() == n && s.queries.rows.cols() == config.dim &&
             s.masks.logits.rows() == n &&
             s.masks.logits.cols() == Eigen::Index(config.height) * config.width;
  }
  checks.push_back({"shape_preservation", shapes, shapes ? 0.0 : 1.0, 0.0, ""});
  return checks;
}

}  // namespace ppseg::sim
