#include "viscodyn/csv.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string_view>

#include "viscodyn/chain.hpp"

namespace viscodyn {

std::string full_precision(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  const std::size_t np = trajectory[0].f.size();
  out << "t,r,v,a";
  for (std::size_t p = 1; p <= np; ++p) out << ",f_" << p;
  out << "\n";
  for (const SdofState& s : trajectory.states()) {
    out << full_precision(s.t) << ',' << full_precision(s.r) << ','
        << full_precision(s.v) << ',' << full_precision(s.a);
    for (double fp : s.f) out << ',' << full_precision(fp);
    out << "\n";
  }
}

void write_energy_csv(std::ostream& out, const Trajectory& trajectory,
                      const EnergyLedger& ledger) {
  if (ledger.node_count() != trajectory.node_count()) {
    throw std::invalid_argument("ledger and trajectory node counts disagree");
  }
  out << "t,E_int,D_d,W_d,Delta_d\n";
  for (std::size_t i = 0; i < ledger.node_count(); ++i) {
    out << full_precision(trajectory[i].t) << ','
        << full_precision(ledger.internal[i]) << ','
        << full_precision(ledger.dissipated[i]) << ','
        << full_precision(ledger.external_work[i]) << ','
        << full_precision(ledger.imbalance[i]) << "\n";
  }
}

void write_report_csv(std::ostream& out, const std::vector<DissipationRow>& rows) {
  out << "dt,delta_ratio,D_over_W\n";
  for (const DissipationRow& row : rows) {
    out << full_precision(row.dt) << ',' << full_precision(row.imbalance_ratio)
        << ',' << full_precision(row.dissipated_over_work) << "\n";
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view text, double& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

}  // namespace

std::vector<std::pair<double, double>> read_load_table(std::istream& in,
                                                       const std::string& origin) {
  std::vector<std::pair<double, double>> samples;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line(raw);
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    auto comma = line.find(',');
    double t = 0.0, f = 0.0;
    if (comma == std::string_view::npos ||
        !parse_double(trim(line.substr(0, comma)), t) ||
        !parse_double(trim(line.substr(comma + 1)), f)) {
      throw ParseError(origin + ":" + std::to_string(lineno) +
                       ": expected 't, F' row");
    }
    if (!samples.empty() && !(t > samples.back().first)) {
      throw ParseError(origin + ":" + std::to_string(lineno) +
                       ": sample times must strictly increase");
    }
    samples.emplace_back(t, f);
  }
  if (samples.empty()) {
    throw ParseError(origin + ": load table has no samples");
  }
  return samples;
}

}  // namespace viscodyn
