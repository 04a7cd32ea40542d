#include <algorithm>
#include <cmath>
#include <numeric>

#include "incident/classifiers.hpp"
#include "incident/errors.hpp"

namespace incident {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// Row indices sorted by each feature's value (ties by row index).
std::vector<std::vector<std::uint32_t>> presort(const Dataset& data) {
  std::vector<std::vector<std::uint32_t>> order(data.width());
  for (std::size_t j = 0; j < data.width(); ++j) {
    auto& idx = order[j];
    idx.resize(data.rows());
    std::iota(idx.begin(), idx.end(), std::uint32_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return data.at(a, j) < data.at(b, j); });
  }
  return order;
}

struct NodeStats {
  double sum = 0.0;
  std::size_t count = 0;
};

struct ScanState {
  NodeStats left;
  double last_value = 0.0;
  bool seen = false;
  SplitChoice best;
};

// Exact greedy least-squares tree grown level by level. Every level is one
// pass over each presorted feature column, updating all open nodes at once.
class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const std::vector<std::vector<std::uint32_t>>& order,
              std::size_t max_depth, std::size_t min_rows)
      : data_(data), order_(order), max_depth_(max_depth), min_rows_(min_rows) {}

  // Fits `target`; writes each row's leaf value into `fitted`.
  RegressionTree fit(std::span<const double> target, std::vector<double>& fitted) {
    const std::size_t n = data_.rows();
    RegressionTree tree;
    tree.nodes.push_back({});
    std::vector<int> node_of(n, 0);
    std::vector<int> open{0};

    for (std::size_t depth = 0; depth < max_depth_ && !open.empty(); ++depth) {
      std::vector<NodeStats> totals(tree.nodes.size());
      for (std::size_t i = 0; i < n; ++i) {
        if (node_of[i] < 0) continue;
        totals[node_of[i]].sum += target[i];
        totals[node_of[i]].count += 1;
      }
      auto choices = best_splits(target, node_of, totals, tree.nodes.size());

      std::vector<int> next_open;
      for (int node : open) {
        const auto& choice = choices[node];
        if (choice.feature < 0) continue;
        int left = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes.push_back({});
        auto& parent = tree.nodes[node];
        parent.feature = choice.feature;
        parent.threshold = choice.threshold;
        parent.left = left;
        parent.right = left + 1;
        next_open.push_back(left);
        next_open.push_back(left + 1);
      }
      for (std::size_t i = 0; i < n; ++i) {
        int node = node_of[i];
        if (node < 0) continue;
        const auto& parent = tree.nodes[node];
        if (parent.feature < 0) continue;
        node_of[i] = data_.at(i, parent.feature) <= parent.threshold ? parent.left : parent.right;
      }
      open = std::move(next_open);
    }

    std::vector<NodeStats> leaf(tree.nodes.size());
    for (std::size_t i = 0; i < n; ++i) {
      leaf[node_of[i]].sum += target[i];
      leaf[node_of[i]].count += 1;
    }
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
      if (tree.nodes[k].feature < 0 && leaf[k].count > 0) {
        tree.nodes[k].value = leaf[k].sum / static_cast<double>(leaf[k].count);
      }
    }
    fitted.resize(n);
    for (std::size_t i = 0; i < n; ++i) fitted[i] = tree.nodes[node_of[i]].value;
    return tree;
  }

  std::vector<SplitChoice> best_splits(std::span<const double> target, const std::vector<int>& node_of,
                                       const std::vector<NodeStats>& totals, std::size_t node_count) {
    std::vector<SplitChoice> best(node_count);
    std::vector<ScanState> scan(node_count);
    for (std::size_t j = 0; j < data_.width(); ++j) {
      for (auto& s : scan) {
        s.left = {};
        s.seen = false;
      }
      for (std::uint32_t i : order_[j]) {
        int node = node_of[i];
        if (node < 0 || totals[node].count == 0) continue;
        auto& s = scan[node];
        const double value = data_.at(i, j);
        if (s.seen && value > s.last_value) {
          consider(s, totals[node], static_cast<int>(j), 0.5 * (s.last_value + value), best[node]);
        }
        s.left.sum += target[i];
        s.left.count += 1;
        s.last_value = value;
        s.seen = true;
      }
    }
    return best;
  }

 private:
  void consider(const ScanState& s, const NodeStats& total, int feature, double threshold,
                SplitChoice& best) const {
    const std::size_t left_n = s.left.count;
    const std::size_t right_n = total.count - left_n;
    if (left_n < min_rows_ || right_n < min_rows_) return;
    const double right_sum = total.sum - s.left.sum;
    const double gain = s.left.sum * s.left.sum / static_cast<double>(left_n) +
                        right_sum * right_sum / static_cast<double>(right_n) -
                        total.sum * total.sum / static_cast<double>(total.count);
    if (gain > best.gain) best = {feature, threshold, gain};
  }

  const Dataset& data_;
  const std::vector<std::vector<std::uint32_t>>& order_;
  std::size_t max_depth_;
  std::size_t min_rows_;
};

}  // namespace

TrainedModel train_gbm(const Dataset& train, const Hyperparams& hp) {
  hp.validate();
  auto counts = class_counts(train);
  if (counts.positives == 0 || counts.negatives == 0) {
    throw DegenerateClassError("gradient boosting needs both classes in the training data");
  }
  const std::size_t n = train.rows();
  TreeEnsemble ensemble;
  // log(p / (1 - p)) with p the positive rate, written as a count ratio so a
  // balanced sample gives exactly 0.
  ensemble.base_score = std::log(static_cast<double>(counts.positives) /
                                 static_cast<double>(counts.negatives));
  ensemble.learning_rate = hp.gbm.learning_rate;

  if (hp.gbm.stages > 0) {
    auto order = presort(train);
    TreeBuilder builder(train, order, hp.gbm.max_depth, hp.gbm.min_rows_per_leaf);
    std::vector<double> log_odds(n, ensemble.base_score);
    std::vector<double> residual(n);
    std::vector<double> fitted;
    for (std::size_t stage = 0; stage < hp.gbm.stages; ++stage) {
      for (std::size_t i = 0; i < n; ++i) residual[i] = train.label(i) - sigmoid(log_odds[i]);
      ensemble.trees.push_back(builder.fit(residual, fitted));
      for (std::size_t i = 0; i < n; ++i) log_odds[i] += ensemble.learning_rate * fitted[i];
    }
  }

  std::vector<std::string> columns;
  for (const auto& col : train.schema().columns()) columns.push_back(col.name);
  return TrainedModel(Algorithm::Gbm, hp, train.schema().fingerprint(), std::move(columns),
                      std::move(ensemble));
}

double mean_log_loss(const Dataset& data, const TreeEnsemble& ensemble) {
  double loss = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    double z = ensemble.log_odds(data.row(i));
    double softplus = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    loss += softplus - (data.label(i) ? z : 0.0);
  }
  return loss / static_cast<double>(data.rows());
}

SplitChoice best_root_split(const Dataset& data, std::span<const double> target,
                            std::size_t min_rows_per_leaf) {
  if (target.size() != data.rows()) throw ArgumentError("target length must match row count");
  auto order = presort(data);
  TreeBuilder builder(data, order, 1, min_rows_per_leaf);
  std::vector<int> node_of(data.rows(), 0);
  NodeStats total;
  for (double t : target) {
    total.sum += t;
    total.count += 1;
  }
  return builder.best_splits(target, node_of, {total}, 1)[0];
}

}  // namespace incident
