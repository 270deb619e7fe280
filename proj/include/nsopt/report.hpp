#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "nsopt/solvers.hpp"

namespace nsopt {

// Ordered "# key: value" lines written above a CSV header.
using Metadata = std::vector<std::pair<std::string, std::string>>;

inline constexpr const char* kTraceColumns = "iter,elapsed_ms,objective,gap,mu,beta,stepsize,grad_map_norm";

// 17 significant digits, '.' as decimal point whatever the global locale.
std::string format_double(double v);
double parse_double_strict(const std::string& text);

void write_trace_csv(std::ostream& out, const Metadata& meta, const std::vector<TraceRecord>& trace);
void write_trace_csv(const std::string& path, const Metadata& meta, const std::vector<TraceRecord>& trace);

struct TraceFile {
  Metadata meta;
  std::vector<TraceRecord> rows;
};

TraceFile read_trace_csv(std::istream& in);
TraceFile read_trace_csv(const std::string& path);

// Iteration indices round(i * total / (count - 1)), i = 0..count-1; index 0 is the start point.
std::vector<std::size_t> checkpoint_iters(std::size_t total, std::size_t count = 10);

struct BenchRun {
  std::string algorithm;
  std::string label;      // shown in tables and plots
  bool ok = false;
  std::string error;      // set when !ok
  double initial_gap = 0.0;
  std::vector<TraceRecord> trace;
  double wall_ms = 0.0;
  std::string note;       // e.g. chosen ADMM penalty
};

struct BenchReport {
  std::string suite;
  Metadata meta;
  std::vector<std::size_t> checkpoints;
  std::vector<BenchRun> runs;

  // Gap of run r at each checkpoint (NaN for failed runs).
  std::vector<double> checkpoint_gaps(const BenchRun& run) const;
  double final_gap(const BenchRun& run) const;

  void write_csv(std::ostream& out) const;
  void write_table(std::ostream& out) const;
  // Log-scale gap-vs-iteration line plot.
  void write_svg(std::ostream& out) const;
};

BenchReport make_report(std::string suite, Metadata meta, std::vector<BenchRun> runs, std::size_t iters,
                        std::size_t count = 10);

}  // namespace nsopt
