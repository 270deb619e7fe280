#include "nsopt/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "nsopt/error.hpp"

namespace nsopt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fixed(double v, int digits) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  return std::string(buf, res.ptr);
}

std::string sci(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 2);
  return std::string(buf, res.ptr);
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

void write_meta(std::ostream& out, const Metadata& meta) {
  for (const auto& [k, v] : meta) {
    std::string value = v;
    std::replace(value.begin(), value.end(), '\n', ' ');
    out << "# " << k << ": " << value << "\n";
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double_strict(const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw Error(ErrorCode::ParseError, "not a number: '" + text + "'");
  }
  return v;
}

void write_trace_csv(std::ostream& out, const Metadata& meta, const std::vector<TraceRecord>& trace) {
  write_meta(out, meta);
  out << kTraceColumns << "\n";
  for (const auto& r : trace) {
    out << r.iter << ',' << format_double(r.elapsed_ms) << ',' << format_double(r.objective) << ','
        << format_double(r.gap) << ',' << format_double(r.mu) << ',' << format_double(r.beta) << ','
        << format_double(r.stepsize) << ',' << format_double(r.grad_map_norm) << '\n';
  }
}

void write_trace_csv(const std::string& path, const Metadata& meta, const std::vector<TraceRecord>& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  write_trace_csv(out, meta, trace);
  if (!out) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}

TraceFile read_trace_csv(std::istream& in) {
  TraceFile tf;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header && line[0] == '#') {
      const auto colon = line.find(": ");
      if (colon == std::string::npos) throw ParseError(line_no, "metadata line without ': '");
      tf.meta.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
      continue;
    }
    if (!header) {
      if (line != kTraceColumns) throw ParseError(line_no, "unexpected CSV header '" + line + "'");
      header = true;
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != 8) throw ParseError(line_no, "expected 8 fields, got " + std::to_string(fields.size()));
    TraceRecord r;
    try {
      const double iter = parse_double_strict(fields[0]);
      if (!(iter >= 0.0) || iter != std::floor(iter)) throw ParseError(line_no, "bad iteration index");
      r.iter = static_cast<std::size_t>(iter);
      r.elapsed_ms = parse_double_strict(fields[1]);
      r.objective = parse_double_strict(fields[2]);
      r.gap = parse_double_strict(fields[3]);
      r.mu = parse_double_strict(fields[4]);
      r.beta = parse_double_strict(fields[5]);
      r.stepsize = parse_double_strict(fields[6]);
      r.grad_map_norm = parse_double_strict(fields[7]);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(line_no, e.detail());
    }
    tf.rows.push_back(r);
  }
  if (!header) throw ParseError(line_no == 0 ? 1 : line_no, "missing CSV header");
  return tf;
}

TraceFile read_trace_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return read_trace_csv(in);
}

std::vector<std::size_t> checkpoint_iters(std::size_t total, std::size_t count) {
  if (count < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 checkpoints");
  if (total < 1) throw Error(ErrorCode::InvalidArgument, "need at least 1 iteration");
  std::vector<std::size_t> out(count);
  const std::size_t den = count - 1;
  for (std::size_t i = 0; i < count; ++i) out[i] = (i * total + den / 2) / den;
  return out;
}

std::vector<double> BenchReport::checkpoint_gaps(const BenchRun& run) const {
  std::vector<double> out;
  out.reserve(checkpoints.size());
  for (std::size_t it : checkpoints) {
    if (!run.ok) {
      out.push_back(kNaN);
    } else if (it == 0) {
      out.push_back(run.initial_gap);
    } else {
      auto pos = std::lower_bound(run.trace.begin(), run.trace.end(), it,
                                  [](const TraceRecord& r, std::size_t i) { return r.iter < i; });
      out.push_back(pos != run.trace.end() && pos->iter == it ? pos->gap : kNaN);
    }
  }
  return out;
}

double BenchReport::final_gap(const BenchRun& run) const {
  if (!run.ok || run.trace.empty()) return kNaN;
  return run.trace.back().gap;
}

void BenchReport::write_csv(std::ostream& out) const {
  out << "# suite: " << suite << "\n";
  write_meta(out, meta);
  out << "algorithm,label,status,wall_ms,final_gap";
  for (std::size_t it : checkpoints) out << ",gap@" << it;
  out << ",note\n";
  for (const auto& run : runs) {
    out << csv_field(run.algorithm) << ',' << csv_field(run.label) << ',' << (run.ok ? "ok" : "failed") << ','
        << format_double(run.wall_ms) << ',' << format_double(final_gap(run));
    for (double g : checkpoint_gaps(run)) out << ',' << format_double(g);
    out << ',' << csv_field(run.ok ? run.note : run.error) << '\n';
  }
}

void BenchReport::write_table(std::ostream& out) const {
  out << "suite: " << suite << "\n";
  for (const auto& [k, v] : meta) out << k << ": " << v << "\n";
  out << "\nrelative gap at " << checkpoints.size() << " equally spaced iterations\n\n";
  std::size_t name_w = 9;
  for (const auto& run : runs) name_w = std::max(name_w, run.label.size());
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  out << pad("algorithm", name_w);
  for (std::size_t it : checkpoints) out << "  " << pad("k=" + std::to_string(it), 9);
  out << "  wall_ms\n";
  for (const auto& run : runs) {
    out << pad(run.label, name_w);
    if (!run.ok) {
      out << "  failed: " << run.error << "\n";
      continue;
    }
    for (double g : checkpoint_gaps(run)) out << "  " << pad(sci(g), 9);
    out << "  " << fixed(run.wall_ms, 1);
    if (!run.note.empty()) out << "  (" << run.note << ")";
    out << "\n";
  }
}

void BenchReport::write_svg(std::ostream& out) const {
  constexpr double kW = 800, kH = 500, kLeft = 70, kRight = 180, kTop = 40, kBottom = 50;
  static constexpr double kFloor = 1e-16;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#17becf", "#bcbd22"};
  const double total = checkpoints.empty() ? 1.0 : static_cast<double>(std::max<std::size_t>(1, checkpoints.back()));

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  auto clamp_gap = [](double g) { return std::max(g, kFloor); };
  for (const auto& run : runs) {
    if (!run.ok) continue;
    for (const auto& r : run.trace) {
      if (std::isfinite(r.gap)) {
        lo = std::min(lo, clamp_gap(r.gap));
        hi = std::max(hi, clamp_gap(r.gap));
      }
    }
    if (std::isfinite(run.initial_gap)) {
      lo = std::min(lo, clamp_gap(run.initial_gap));
      hi = std::max(hi, clamp_gap(run.initial_gap));
    }
  }
  if (!std::isfinite(lo)) {
    lo = 1e-6;
    hi = 1.0;
  }
  double dlo = std::floor(std::log10(lo));
  double dhi = std::ceil(std::log10(hi));
  if (dhi <= dlo) dhi = dlo + 1;

  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  auto px = [&](double it) { return kLeft + pw * it / total; };
  auto py = [&](double g) { return kTop + ph * (dhi - std::log10(clamp_gap(g))) / (dhi - dlo); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << fixed(kLeft, 2) << "\" y=\"24\" font-size=\"14\">" << xml_escape(suite)
      << ": relative gap vs iteration</text>\n";
  // decade grid
  for (double d = dlo; d <= dhi; d += 1.0) {
    const double y = kTop + ph * (dhi - d) / (dhi - dlo);
    out << "<line x1=\"" << fixed(kLeft, 2) << "\" y1=\"" << fixed(y, 2) << "\" x2=\"" << fixed(kLeft + pw, 2)
        << "\" y2=\"" << fixed(y, 2) << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << fixed(kLeft - 6, 2) << "\" y=\"" << fixed(y + 4, 2) << "\" text-anchor=\"end\">1e"
        << static_cast<int>(d) << "</text>\n";
  }
  for (std::size_t it : checkpoints) {
    const double x = px(static_cast<double>(it));
    out << "<text x=\"" << fixed(x, 2) << "\" y=\"" << fixed(kTop + ph + 18, 2) << "\" text-anchor=\"middle\">"
        << it << "</text>\n";
  }
  out << "<rect x=\"" << fixed(kLeft, 2) << "\" y=\"" << fixed(kTop, 2) << "\" width=\"" << fixed(pw, 2)
      << "\" height=\"" << fixed(ph, 2) << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << fixed(kLeft + pw / 2, 2) << "\" y=\"" << fixed(kH - 10, 2)
      << "\" text-anchor=\"middle\">iteration</text>\n";

  std::size_t series = 0;
  for (const auto& run : runs) {
    if (!run.ok || run.trace.empty()) continue;
    const char* color = kColors[series % (sizeof kColors / sizeof kColors[0])];
    // at most ~500 vertices per line
    const std::size_t stride = std::max<std::size_t>(1, run.trace.size() / 500);
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    if (std::isfinite(run.initial_gap)) out << fixed(px(0), 2) << ',' << fixed(py(run.initial_gap), 2) << ' ';
    for (std::size_t i = 0; i < run.trace.size(); i += stride) {
      const auto& r = run.trace[i];
      if (!std::isfinite(r.gap)) continue;
      out << fixed(px(static_cast<double>(r.iter)), 2) << ',' << fixed(py(r.gap), 2) << ' ';
    }
    const auto& last = run.trace.back();
    if (std::isfinite(last.gap)) out << fixed(px(static_cast<double>(last.iter)), 2) << ',' << fixed(py(last.gap), 2);
    out << "\"/>\n";
    const double ly = kTop + 16.0 * static_cast<double>(series) + 8.0;
    out << "<line x1=\"" << fixed(kLeft + pw + 12, 2) << "\" y1=\"" << fixed(ly, 2) << "\" x2=\""
        << fixed(kLeft + pw + 36, 2) << "\" y2=\"" << fixed(ly, 2) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << fixed(kLeft + pw + 42, 2) << "\" y=\"" << fixed(ly + 4, 2) << "\">"
        << xml_escape(run.label) << "</text>\n";
    ++series;
  }
  out << "</svg>\n";
}

BenchReport make_report(std::string suite, Metadata meta, std::vector<BenchRun> runs, std::size_t iters,
                        std::size_t count) {
  BenchReport rep;
  rep.suite = std::move(suite);
  rep.meta = std::move(meta);
  rep.checkpoints = checkpoint_iters(iters, count);
  rep.runs = std::move(runs);
  return rep;
}

}  // namespace nsopt
