#pragma once

#include <string>
#include <vector>

namespace duat {

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  double seconds = 0.0;

  bool operator==(const EpochMetrics&) const = default;
};

using MetricsHistory = std::vector<EpochMetrics>;

/// JSON-lines, one object per epoch with keys in the order
/// epoch, train_loss, train_acc, test_acc, seconds. Truncates `path`.
void write_metrics(const MetricsHistory& history, const std::string& path);
MetricsHistory read_metrics(const std::string& path);

std::string metrics_line(const EpochMetrics& m);

}  // namespace duat
