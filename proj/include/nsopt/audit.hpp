#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace nsopt {

struct AuditLine {
  std::string suite;
  std::string name;
  bool pass = false;
  std::string detail;  // first counterexample on failure, a summary otherwise
};

// Suites: schedule, smoothing, prox, bound7, tail-rate, all.
std::vector<std::string_view> audit_suites();
std::vector<AuditLine> run_audit(std::string_view suite, std::uint64_t seed);

}  // namespace nsopt
