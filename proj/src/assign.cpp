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

#include "ppseg/assign.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>

#include "ppseg/error.hpp"

namespace ppseg {
namespace {

void RequireSameLength(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::kShapeMismatch, std::string(what) + ": " + std::to_string(a) +
                                               " vs " + std::to_string(b) + " elements");
  }
}

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Minimum-cost perfect matching on a square matrix. Returns the row->col
// matching and leaves dual potentials in `u`, `v` (reduced cost
// a(i,j) - u(i) - v(j) >= 0, zero on the matching).
std::vector<int> Hungarian(const Eigen::MatrixXd& a, std::vector<double>& u,
                           std::vector<double>& v) {
  const int n = static_cast<int>(a.rows());
  const double inf = std::numeric_limits<double>::infinity();
  u.assign(n + 1, 0.0);
  v.assign(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

// Rewrites an optimal matching into the lexicographically smallest optimal
// one by walking rows in order and pulling each onto its lowest tight
// column whenever an alternating path can repair the rest.
void LexicographicRefine(const Eigen::MatrixXd& a, const std::vector<double>& u,
                         const std::vector<double>& v, std::vector<int>& match_row) {
  const int n = static_cast<int>(a.rows());
  const double tol = 1e-9 * std::max(1.0, a.cwiseAbs().maxCoeff());
  auto tight = [&](int i, int j) { return a(i, j) - u[i + 1] - v[j + 1] <= tol; };

  std::vector<int> match_col(n);
  for (int i = 0; i < n; ++i) match_col[match_row[i]] = i;
  std::vector<char> locked(n, 0), visited(n, 0);

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (locked[j] || !tight(i, j)) continue;
      if (match_row[i] == j) break;
      const int freed = match_row[i];
      std::fill(visited.begin(), visited.end(), 0);
      std::function<bool(int)> reroute = [&](int row) {
        for (int c = 0; c < n; ++c) {
          if (visited[c] || locked[c] || c == j || !tight(row, c)) continue;
          visited[c] = 1;
          if (c == freed || reroute(match_col[c])) {
            match_col[c] = row;
            match_row[row] = c;
            return true;
          }
        }
        return false;
      };
      if (reroute(match_col[j])) {
        match_row[i] = j;
        match_col[j] = i;
        break;
      }
    }
    locked[match_row[i]] = 1;
  }
}

}  // namespace

double DiceLoss(std::span<const double> pred, std::span<const double> gt, DiceVariant variant) {
  RequireSameLength(pred.size(), gt.size(), "dice loss");
  double inter = 0.0, pred_sum = 0.0, gt_sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    inter += pred[i] * gt[i];
    pred_sum += variant == DiceVariant::kSquared ? pred[i] * pred[i] : pred[i];
    gt_sum += variant == DiceVariant::kSquared ? gt[i] * gt[i] : gt[i];
  }
  return 1.0 - (2.0 * inter + 1.0) / (pred_sum + gt_sum + 1.0);
}

double MaskCrossEntropy(std::span<const double> logits, std::span<const double> gt) {
  RequireSameLength(logits.size(), gt.size(), "mask cross-entropy");
  if (logits.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double x = logits[i];
    // log(1 + e^x) - x * y, written to avoid overflow.
    total += std::max(x, 0.0) - x * gt[i] + std::log1p(std::exp(-std::abs(x)));
  }
  return total / static_cast<double>(logits.size());
}

CostMatrix BuildCostMatrix(const Eigen::MatrixXd& class_logits,
                           const Eigen::MatrixXd& mask_logits,
                           std::span<const int> target_classes,
                           const Eigen::MatrixXd& target_masks,
                           const MatchingCostWeights& weights) {
  RequireSameLength(class_logits.rows(), mask_logits.rows(), "prediction count");
  RequireSameLength(target_classes.size(), target_masks.rows(), "target count");
  RequireSameLength(mask_logits.cols(), target_masks.cols(), "mask pixels");
  const Eigen::Index n = class_logits.rows(), t = target_masks.rows(), c = class_logits.cols();
  for (int cls : target_classes) {
    if (cls < 0 || cls >= c) {
      throw Error(ErrorCode::kShapeMismatch, "target class " + std::to_string(cls) +
                                                 " outside [0, " + std::to_string(c) + ")");
    }
  }

  CostMatrix cost;
  cost.cls.resize(n, t);
  cost.mask.resize(n, t);
  cost.dice.resize(n, t);
  const Eigen::MatrixXd probs = mask_logits.unaryExpr(&Sigmoid);
  // Row-major copies so each mask is a contiguous span.
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor logits_rm = mask_logits, probs_rm = probs, targets_rm = target_masks;
  const auto pixels = static_cast<std::size_t>(mask_logits.cols());

  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::RowVectorXd shifted =
        class_logits.row(i).array() - class_logits.row(i).maxCoeff();
    const Eigen::RowVectorXd softmax = shifted.array().exp() / shifted.array().exp().sum();
    std::span<const double> logit_row(logits_rm.data() + i * pixels, pixels);
    std::span<const double> prob_row(probs_rm.data() + i * pixels, pixels);
    for (Eigen::Index j = 0; j < t; ++j) {
      std::span<const double> target_row(targets_rm.data() + j * pixels, pixels);
      cost.cls(i, j) = -softmax(target_classes[j]);
      cost.mask(i, j) = MaskCrossEntropy(logit_row, target_row);
      cost.dice(i, j) = DiceLoss(prob_row, target_row);
    }
  }
  cost.total = weights.cls * cost.cls + weights.mask * cost.mask + weights.dice * cost.dice;
  return cost;
}

Assignment SolveAssignment(const Eigen::MatrixXd& cost) {
  if (!cost.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "cost matrix holds NaN or infinite entries");
  }
  const Eigen::Index rows = cost.rows(), cols = cost.cols();
  Assignment out;
  out.row_to_col.assign(rows, -1);
  const Eigen::Index n = std::max(rows, cols);
  if (n == 0) return out;

  Eigen::MatrixXd square = Eigen::MatrixXd::Zero(n, n);
  square.topLeftCorner(rows, cols) = cost;
  std::vector<double> u, v;
  std::vector<int> match = Hungarian(square, u, v);
  LexicographicRefine(square, u, v, match);

  for (Eigen::Index i = 0; i < rows; ++i) {
    if (match[i] < cols) {
      out.row_to_col[i] = match[i];
      out.total_cost += cost(i, match[i]);
    }
  }
  return out;
}

Assignment SolveSectionedAssignment(const Eigen::MatrixXd& cost,
                                    std::span<const int> row_sections,
                                    std::span<const int> col_sections) {
  RequireSameLength(row_sections.size(), cost.rows(), "row sections");
  RequireSameLength(col_sections.size(), cost.cols(), "column sections");
  std::map<int, std::pair<std::vector<int>, std::vector<int>>> groups;
  for (int i = 0; i < static_cast<int>(row_sections.size()); ++i) {
    groups[row_sections[i]].first.push_back(i);
  }
  for (int j = 0; j < static_cast<int>(col_sections.size()); ++j) {
    groups[col_sections[j]].second.push_back(j);
  }

  Assignment out;
  out.row_to_col.assign(cost.rows(), -1);
  for (const auto& [section, members] : groups) {
    const auto& [rows, cols] = members;
    Eigen::MatrixXd sub(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < cols.size(); ++c) sub(r, c) = cost(rows[r], cols[c]);
    }
    const Assignment part = SolveAssignment(sub);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (part.row_to_col[r] >= 0) out.row_to_col[rows[r]] = cols[part.row_to_col[r]];
    }
  }
  for (Eigen::Index i = 0; i < cost.rows(); ++i) {
    if (out.row_to_col[i] >= 0) out.total_cost += cost(i, out.row_to_col[i]);
  }
  return out;
}

double TotalLoss(std::span<const StageLoss> stages, const LossWeights& weights) {
  if (stages.empty()) throw Error(ErrorCode::kEmptyStages, "no stage losses given");
  double total = 0.0;
  for (const StageLoss& s : stages) {
    total += weights.part * s.part + weights.thing * s.thing + weights.stuff * s.stuff +
             weights.cls * s.cls;
    if (s.semantic_part) total += weights.semantic_part * *s.semantic_part;
  }
  return total;
}

}  // namespace ppseg
