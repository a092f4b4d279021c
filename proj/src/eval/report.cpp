#include "eval/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "core/binio.hpp"

namespace bg::eval {

namespace {

std::string fmt_pct(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", rate * 100.0);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, sep)) out.push_back(field);
  return out;
}

}  // namespace

std::string report_to_csv(const Report& report) {
  std::ostringstream out;
  out << "policy," << report.policy_name << "\n";
  out << "object,trials,successes,rate\n";
  for (const auto& r : report.per_object()) {
    out << r.object_id << ',' << r.trials << ',' << r.successes << ',' << r.rate() << "\n";
  }
  out << "overall," << report.trials.size() << ','
      << static_cast<int>(report.overall_rate() * report.trials.size() + 0.5) << ','
      << report.overall_rate() << "\n";
  out << "trials\n";
  out << "object,seed,success,time_to_grasp,peak_force\n";
  for (const auto& t : report.trials) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s,%llu,%d,%.17g,%.17g", t.object_id.c_str(),
                  static_cast<unsigned long long>(t.seed), t.success ? 1 : 0, t.time_to_grasp,
                  t.peak_force);
    out << buf << "\n";
  }
  return out.str();
}

Report report_from_csv(const std::string& csv) {
  Report report;
  std::stringstream ss(csv);
  std::string line;
  bool in_trials = false;
  bool header_skipped = false;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    if (!in_trials) {
      if (line.rfind("policy,", 0) == 0) {
        report.policy_name = line.substr(7);
      } else if (line == "trials") {
        in_trials = true;
      }
      continue;
    }
    if (!header_skipped) {
      header_skipped = true;  // column header
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 5) throw std::runtime_error("report CSV: bad trial row: " + line);
    TrialResult t;
    t.object_id = f[0];
    t.seed = std::stoull(f[1]);
    t.success = f[2] == "1";
    t.time_to_grasp = std::stod(f[3]);
    t.peak_force = std::stod(f[4]);
    report.trials.push_back(std::move(t));
  }
  return report;
}

std::string report_to_markdown(const Report& report) {
  std::ostringstream out;
  out << "| Object | Trials | Success rate |\n|---|---|---|\n";
  for (const auto& r : report.per_object()) {
    out << "| " << r.object_id << " | " << r.trials << " | " << fmt_pct(r.rate()) << " |\n";
  }
  out << "| **Overall** | " << report.trials.size() << " | **" << fmt_pct(report.overall_rate())
      << "** |\n";
  return out.str();
}

void write_report(const Report& report, const std::string& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir + "/" + stem + ".csv");
    if (!f) throw std::runtime_error("cannot write report CSV in " + dir);
    f << report_to_csv(report);
  }
  std::ofstream f(dir + "/" + stem + ".md");
  if (!f) throw std::runtime_error("cannot write report markdown in " + dir);
  f << "## " << report.policy_name << "\n\n" << report_to_markdown(report);
}

AblationReport AblationReport::from_reports(const std::vector<Report>& reports) {
  AblationReport table;
  if (reports.empty()) return table;
  for (const auto& r : reports[0].per_object()) table.objects.push_back(r.object_id);
  for (const auto& rep : reports) {
    table.variants.push_back(rep.policy_name);
    std::vector<double> col;
    const auto rates = rep.per_object();
    for (const auto& obj : table.objects) {
      double rate = 0;
      for (const auto& r : rates) {
        if (r.object_id == obj) rate = r.rate();
      }
      col.push_back(rate);
    }
    // store column-wise for now; transpose below
    if (table.rates.empty()) table.rates.assign(table.objects.size(), {});
    for (size_t i = 0; i < table.objects.size(); ++i) table.rates[i].push_back(col[i]);
    double avg = 0;
    for (double v : col) avg += v;
    table.averages.push_back(col.empty() ? 0.0 : avg / col.size());
  }
  return table;
}

std::string ablation_to_csv(const AblationReport& t) {
  std::ostringstream out;
  out << "object";
  for (const auto& v : t.variants) out << ',' << v;
  out << "\n";
  for (size_t i = 0; i < t.objects.size(); ++i) {
    out << t.objects[i];
    for (double r : t.rates[i]) out << ',' << r;
    out << "\n";
  }
  out << "average";
  for (double a : t.averages) out << ',' << a;
  out << "\n";
  return out.str();
}

std::string ablation_to_markdown(const AblationReport& t) {
  std::ostringstream out;
  out << "| Object |";
  for (const auto& v : t.variants) out << ' ' << v << " |";
  out << "\n|---|";
  for (size_t i = 0; i < t.variants.size(); ++i) out << "---|";
  out << "\n";
  for (size_t i = 0; i < t.objects.size(); ++i) {
    out << "| " << t.objects[i] << " |";
    for (double r : t.rates[i]) out << ' ' << fmt_pct(r) << " |";
    out << "\n";
  }
  out << "| **Average** |";
  for (double a : t.averages) out << " **" << fmt_pct(a) << "** |";
  out << "\n";
  return out.str();
}

}  // namespace bg::eval
