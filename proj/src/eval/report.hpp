#pragma once

#include "eval/protocol.hpp"

namespace bg::eval {

//! Machine-readable export: a summary block plus the raw per-trial records,
//! from which the summary can be regenerated exactly.
std::string report_to_csv(const Report& report);
Report report_from_csv(const std::string& csv);

//! Human-readable table; one row per object, percentages to one decimal.
std::string report_to_markdown(const Report& report);

void write_report(const Report& report, const std::string& dir, const std::string& stem);

//! Cross-variant comparison table: rows are objects, columns are variants.
struct AblationReport {
  std::vector<std::string> objects;
  std::vector<std::string> variants;
  std::vector<std::vector<double>> rates;  // [object][variant]
  std::vector<double> averages;            // per variant

  static AblationReport from_reports(const std::vector<Report>& reports);
};

std::string ablation_to_csv(const AblationReport& table);
std::string ablation_to_markdown(const AblationReport& table);

}  // namespace bg::eval
