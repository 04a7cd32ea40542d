#include <algorithm>
#include <utility>

#include "incident/classifiers.hpp"
#include "incident/errors.hpp"
#include "knn_detail.hpp"

namespace incident {

namespace detail {

std::vector<std::uint8_t> knn_sweep(const NeighborStore& store, std::span<const double> query,
                                    std::size_t max_k) {
  // Sorted buffer of the best max_k (distance, index) pairs so far.
  std::vector<std::pair<double, std::size_t>> best;
  best.reserve(max_k + 1);
  const std::size_t width = store.width;
  for (std::size_t i = 0; i < store.size(); ++i) {
    const double* row = store.rows.data() + i * width;
    double dist = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      double d = row[j] - query[j];
      dist += d * d;
    }
    if (best.size() == max_k && dist >= best.back().first) continue;
    std::pair<double, std::size_t> entry{dist, i};
    best.insert(std::upper_bound(best.begin(), best.end(), entry), entry);
    if (best.size() > max_k) best.pop_back();
  }

  std::vector<std::uint8_t> votes(max_k);
  std::size_t positives = 0;
  const std::uint8_t nearest = store.labels[best.front().second];
  for (std::size_t k = 1; k <= max_k; ++k) {
    positives += store.labels[best[k - 1].second];
    if (2 * positives > k) {
      votes[k - 1] = 1;
    } else if (2 * positives < k) {
      votes[k - 1] = 0;
    } else {
      votes[k - 1] = nearest;
    }
  }
  return votes;
}

}  // namespace detail

TrainedModel train_knn(const Dataset& train, const Hyperparams& hp) {
  hp.validate();
  if (hp.knn.k > train.rows()) {
    throw ArgumentError("k-NN with k=" + std::to_string(hp.knn.k) + " needs at least k rows, got " +
                        std::to_string(train.rows()));
  }
  NeighborStore store;
  store.k = hp.knn.k;
  store.width = train.width();
  store.rows.assign(train.values().begin(), train.values().end());
  store.labels.assign(train.labels().begin(), train.labels().end());
  std::vector<std::string> columns;
  for (const auto& col : train.schema().columns()) columns.push_back(col.name);
  return TrainedModel(Algorithm::Knn, hp, train.schema().fingerprint(), std::move(columns),
                      std::move(store));
}

}  // namespace incident
