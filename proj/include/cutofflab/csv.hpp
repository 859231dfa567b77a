#pragma once

// Deterministic CSV output: fixed column order, 17 significant digits,
// UNIX line endings, tolerances logged as header comments.

#include <cstdio>
#include <string>
#include <vector>

namespace cutofflab {

/// Shortest representation that round-trips a double (17 significant digits).
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct CsvRow {
  long family_param = 0;
  unsigned k = 0;
  double upper_l2 = 0.0;          // inf = divergent, nan = unknown
  double upper_closed_paper = 0.0;
  double upper_closed_exact = 0.0;
  double lower_best = 0.0;
  std::string lower_kind = "none";
  std::string density_verdict = "inconclusive";
  unsigned truncation_radius = 0;
  double tail_bound = 0.0;
};

inline const char* kCsvHeader =
    "family_param,k,upper_l2,upper_closed_paper,upper_closed_exact,"
    "lower_best,lower_kind,density_verdict,truncation_radius,tail_bound";

class CsvWriter {
 public:
  void comment(const std::string& line) {
    body_ += "# " + line + "\n";
  }

  void header() { body_ += std::string(kCsvHeader) + "\n"; }

  void row(const CsvRow& r) {
    body_ += std::to_string(r.family_param);
    body_ += ',';
    body_ += std::to_string(r.k);
    body_ += ',';
    body_ += format_g17(r.upper_l2);
    body_ += ',';
    body_ += format_g17(r.upper_closed_paper);
    body_ += ',';
    body_ += format_g17(r.upper_closed_exact);
    body_ += ',';
    body_ += format_g17(r.lower_best);
    body_ += ',';
    body_ += r.lower_kind;
    body_ += ',';
    body_ += r.density_verdict;
    body_ += ',';
    body_ += std::to_string(r.truncation_radius);
    body_ += ',';
    body_ += format_g17(r.tail_bound);
    body_ += '\n';
  }

  const std::string& str() const { return body_; }

 private:
  std::string body_;
};

}  // namespace cutofflab
