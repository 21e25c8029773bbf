#pragma once

#include "hjbd/specs.hpp"

#include <string>
#include <vector>

namespace hjbd {

struct CheckRecord {
  std::string check;
  double measured = 0.0;
  std::string threshold;  // "<=x", ">=x", "in [a, b]" or "==x"
  bool pass = false;
  std::string anchor;     // the identity or result the check is about, or "plumbing"
};

struct StudyReport {
  std::vector<CheckRecord> records;
  std::vector<std::string> files;  // artifacts written, relative to the output directory
  bool pass() const;
};

/// Collects check records with uniform formatting.
class Recorder {
 public:
  void at_most(const std::string& check, double measured, double limit, const std::string& anchor);
  void at_least(const std::string& check, double measured, double limit, const std::string& anchor);
  void within(const std::string& check, double measured, double lo, double hi, const std::string& anchor);
  void equals(const std::string& check, double measured, double expected, const std::string& anchor);
  void failure(const std::string& check, const std::string& message, const std::string& anchor);

  std::vector<CheckRecord>& records() { return records_; }

 private:
  std::vector<CheckRecord> records_;
};

/// Runs the configured study, writes report.csv, meta.json and per-study
/// artifacts into cfg.output_dir. Module errors become failed records;
/// only I/O failures throw.
StudyReport run_study(const ExperimentConfig& cfg);

std::string report_csv(const StudyReport& report);

}  // namespace hjbd
