#include "duat/metrics.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace duat {

std::string metrics_line(const EpochMetrics& m) {
  nlohmann::ordered_json j;
  j["epoch"] = m.epoch;
  j["train_loss"] = m.train_loss;
  j["train_acc"] = m.train_acc;
  j["test_acc"] = m.test_acc;
  j["seconds"] = m.seconds;
  return j.dump();
}

void write_metrics(const MetricsHistory& history, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (const auto& m : history) out << metrics_line(m) << '\n';
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

MetricsHistory read_metrics(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  MetricsHistory history;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      EpochMetrics m;
      m.epoch = j.at("epoch").get<std::size_t>();
      m.train_loss = j.at("train_loss").get<double>();
      m.train_acc = j.at("train_acc").get<double>();
      m.test_acc = j.at("test_acc").get<double>();
      m.seconds = j.at("seconds").get<double>();
      history.push_back(m);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return history;
}

}  // namespace duat
