#include <stdexcept>

#include "duat/train.hpp"

namespace duat {

std::vector<SweepRow> hop_sweep(const TrainConfig& config, const Dataset& data, std::span<const std::size_t> hops) {
  std::vector<SweepRow> rows;
  for (std::size_t k : hops) {
    if (k < 1 || k > 3) throw std::invalid_argument("hops: " + std::to_string(k) + " is not in 1..3");
    TrainConfig c = config;
    c.hops = k;
    auto r = train(c, data);
    const auto& last = r.history.back();
    rows.push_back({k, last.train_acc, last.test_acc, last.train_loss});
  }
  return rows;
}

AblationReport ablate(const TrainConfig& config, const Dataset& data, std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw std::invalid_argument("seeds: need at least one seed");
  AblationReport report;
  for (std::uint64_t seed : seeds) {
    TrainConfig c = config;
    c.seed = seed;
    c.arm = Arm::dual_attention;
    const double dual = train(c, data).history.back().test_acc;
    c.arm = Arm::plain_convolution;
    const double plain = train(c, data).history.back().test_acc;
    report.rows.push_back({seed, dual, plain});
    report.mean_dual += dual;
    report.mean_plain += plain;
  }
  report.mean_dual /= static_cast<double>(seeds.size());
  report.mean_plain /= static_cast<double>(seeds.size());
  return report;
}

}  // namespace duat
