#include "dualseq/eval/report.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "dualseq/data/corpus.hpp"
#include "dualseq/errors.hpp"

namespace dualseq::eval {

namespace {

double parse_double(const std::string& s, std::size_t lineno) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError(fmt::format("report line {}: bad number '{}'", lineno, s));
  }
  return v;
}

std::uint64_t parse_u64(const std::string& s, std::size_t lineno) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError(fmt::format("report line {}: bad integer '{}'", lineno, s));
  }
  return v;
}

std::string number(double v) { return fmt::format("{}", v); }  // shortest round-trip form

}  // namespace

double ExperimentReport::bleu(const std::string& method, double pct) const {
  for (const auto& r : rows) {
    if (r.method == method && r.pct == pct) return r.bleu;
  }
  throw ContractError(fmt::format("report has no row {} at {}%", method, pct));
}

std::string render_table(const ExperimentReport& report) {
  if (report.rows.empty()) throw ContractError("cannot render an empty report");
  std::string s = fmt::format("{} (seed {}, {} BLEU against test.pred)\n", report.kind, report.seed, report.bleu_mode);
  s += fmt::format("{:<14}{:>8}{:>10}\n", "method", "data %", "BLEU");
  for (const auto& r : report.rows) s += fmt::format("{:<14}{:>8}{:>10.4f}\n", r.method, number(r.pct), r.bleu);
  return s;
}

std::string render_keyvalue(const ExperimentReport& report) {
  if (report.rows.empty()) throw ContractError("cannot render an empty report");
  std::string s;
  s += fmt::format("# kind={}\n# dims={}\n# corpus={}\n# bleu_mode={}\n", report.kind, report.dims, report.corpus_id,
                   report.bleu_mode);
  for (const auto& r : report.rows) {
    s += fmt::format("method={} pct={} bleu={} seed={}\n", r.method, number(r.pct), number(r.bleu), report.seed);
  }
  return s;
}

ExperimentReport parse_keyvalue(std::istream& in) {
  ExperimentReport report;
  std::string line;
  bool seen_seed = false;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      if (key == "kind") report.kind = value;
      else if (key == "dims") report.dims = value;
      else if (key == "corpus") report.corpus_id = value;
      else if (key == "bleu_mode") report.bleu_mode = value;
      continue;
    }
    std::map<std::string, std::string> kv;
    std::istringstream fields(line);
    for (std::string f; fields >> f;) {
      const auto eq = f.find('=');
      if (eq == std::string::npos) throw DataError(fmt::format("report line {}: expected key=value, got '{}'", lineno, f));
      kv[f.substr(0, eq)] = f.substr(eq + 1);
    }
    for (const char* k : {"method", "pct", "bleu", "seed"}) {
      if (!kv.count(k)) throw DataError(fmt::format("report line {}: missing {}", lineno, k));
    }
    ReportRow row{kv["method"], parse_double(kv["pct"], lineno), parse_double(kv["bleu"], lineno)};
    const auto seed = parse_u64(kv["seed"], lineno);
    if (seen_seed && seed != report.seed) throw DataError(fmt::format("report line {}: mixed seeds", lineno));
    report.seed = seed;
    seen_seed = true;
    report.rows.push_back(std::move(row));
  }
  return report;
}

void write_report(const std::filesystem::path& path, const ExperimentReport& report) {
  std::vector<std::string> lines;
  std::istringstream in(render_keyvalue(report));
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  data::write_lines(path, lines);
}

ExperimentReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open report {}", path.string()));
  return parse_keyvalue(in);
}

}  // namespace dualseq::eval
