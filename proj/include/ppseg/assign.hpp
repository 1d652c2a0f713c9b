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

#ifndef PPSEG_ASSIGN_HPP_
#define PPSEG_ASSIGN_HPP_

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace ppseg {

enum class DiceVariant {
  kLinear,   // 1 - (2 Σpg + 1) / (Σp + Σg + 1)
  kSquared,  // 1 - (2 Σpg + 1) / (Σp² + Σg² + 1)
};

// Soft dice loss with unit smoothing. `pred` holds probabilities in [0, 1],
// `gt` a binary mask. kShapeMismatch on length disagreement.
double DiceLoss(std::span<const double> pred, std::span<const double> gt,
                DiceVariant variant = DiceVariant::kLinear);

// Mean binary cross-entropy of per-pixel logits against a binary mask.
double MaskCrossEntropy(std::span<const double> logits, std::span<const double> gt);

struct MatchingCostWeights {
  double cls = 2.0;
  double mask = 5.0;
  double dice = 5.0;
};

// Prediction-by-target matching cost, with its components kept.
struct CostMatrix {
  Eigen::MatrixXd total;
  Eigen::MatrixXd cls;   // -softmax probability of the target class
  Eigen::MatrixXd mask;  // mask cross-entropy
  Eigen::MatrixXd dice;  // dice loss on sigmoid probabilities

  Eigen::Index rows() const { return total.rows(); }
  Eigen::Index cols() const { return total.cols(); }
};

// class_logits: N x C, mask_logits: N x P (flattened pixels),
// target_classes: T entries in [0, C), target_masks: T x P binary.
CostMatrix BuildCostMatrix(const Eigen::MatrixXd& class_logits,
                           const Eigen::MatrixXd& mask_logits,
                           std::span<const int> target_classes,
                           const Eigen::MatrixXd& target_masks,
                           const MatchingCostWeights& weights = {});

struct Assignment {
  std::vector<int> row_to_col;  // -1 for unassigned rows
  double total_cost = 0.0;      // summed in row order
};

// Minimum-cost assignment (Hungarian method on the zero-padded square
// matrix). Among optimal assignments the lexicographically smallest
// row_to_col is returned. kNonFinite on NaN/inf entries.
Assignment SolveAssignment(const Eigen::MatrixXd& cost);
inline Assignment SolveAssignment(const CostMatrix& cost) { return SolveAssignment(cost.total); }

// Solves one assignment per section: predictions of section s only compete
// for targets of section s. Sections are small non-negative integers (e.g.
// thing / stuff / part).
Assignment SolveSectionedAssignment(const Eigen::MatrixXd& cost,
                                    std::span<const int> row_sections,
                                    std::span<const int> col_sections);

struct LossWeights {
  double part = 1.0;
  double thing = 1.0;
  double stuff = 1.0;
  double cls = 1.0;
  double semantic_part = 1.0;  // only applied to stages that carry the term
};

struct StageLoss {
  double part = 0.0;
  double thing = 0.0;
  double stuff = 0.0;
  double cls = 0.0;
  std::optional<double> semantic_part;  // dense part-feature loss of the v2 decoder
};

// Σ over stages of the weighted per-stage loss. kEmptyStages when empty.
double TotalLoss(std::span<const StageLoss> stages, const LossWeights& weights = {});

}  // namespace ppseg

#endif  // PPSEG_ASSIGN_HPP_
