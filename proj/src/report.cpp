#include "salref/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace salref {

namespace {

constexpr const char* kRunHeader = "setting,procedure,n,seed,nss,auc,cc";
constexpr const char* kPerImageHeader = "index,nss,auc,cc";

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
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

template <typename T>
T parse_field(const std::string& s, int line, const char* what) {
  T out{};
  auto [ptr, ec] = std::from_chars(s.c_str(), s.c_str() + s.size(), out);
  if (ec != std::errc{} || ptr != s.c_str() + s.size())
    throw std::runtime_error("csv line " + std::to_string(line) + ": bad " + what + " '" + s +
                             "'");
  return out;
}

}  // namespace

std::string records_to_csv(const std::vector<RunRecord>& records) {
  std::string out = kRunHeader;
  out += '\n';
  for (const RunRecord& r : records) {
    out += r.setting;
    out += ',';
    out += r.procedure;
    out += ',';
    out += std::to_string(r.n);
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += fmt_g(r.metrics.nss);
    out += ',';
    out += fmt_g(r.metrics.auc);
    out += ',';
    out += fmt_g(r.metrics.cc);
    out += '\n';
  }
  return out;
}

std::vector<RunRecord> parse_records_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<RunRecord> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1) {
      if (line != kRunHeader)
        throw std::runtime_error("csv: unexpected header '" + line + "'");
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 7)
      throw std::runtime_error("csv line " + std::to_string(lineno) + ": expected 7 fields");
    RunRecord r;
    r.setting = f[0];
    r.procedure = f[1];
    r.n = parse_field<int>(f[2], lineno, "n");
    r.seed = parse_field<uint64_t>(f[3], lineno, "seed");
    r.metrics.nss = parse_field<double>(f[4], lineno, "nss");
    r.metrics.auc = parse_field<double>(f[5], lineno, "auc");
    r.metrics.cc = parse_field<double>(f[6], lineno, "cc");
    out.push_back(std::move(r));
  }
  return out;
}

std::string per_image_csv(const std::vector<MetricTriple>& scores) {
  std::string out = kPerImageHeader;
  out += '\n';
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += fmt_g(scores[i].nss);
    out += ',';
    out += fmt_g(scores[i].auc);
    out += ',';
    out += fmt_g(scores[i].cc);
    out += '\n';
  }
  return out;
}

std::vector<MetricTriple> parse_per_image_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<MetricTriple> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1) {
      if (line != kPerImageHeader)
        throw std::runtime_error("csv: unexpected header '" + line + "'");
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 4)
      throw std::runtime_error("csv line " + std::to_string(lineno) + ": expected 4 fields");
    MetricTriple m;
    m.nss = parse_field<double>(f[1], lineno, "nss");
    m.auc = parse_field<double>(f[2], lineno, "auc");
    m.cc = parse_field<double>(f[3], lineno, "cc");
    out.push_back(m);
  }
  return out;
}

std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records) {
  if (records.empty()) throw std::invalid_argument("aggregate: no records");
  struct Group {
    AggregateRow row;
    std::vector<double> nss, auc, cc;
    double gate_sum = 0.0;
  };
  std::vector<Group> groups;
  for (const RunRecord& r : records) {
    Group* g = nullptr;
    for (Group& cand : groups)
      if (cand.row.setting == r.setting && cand.row.procedure == r.procedure && cand.row.n == r.n)
        g = &cand;
    if (!g) {
      groups.push_back({});
      g = &groups.back();
      g->row.setting = r.setting;
      g->row.procedure = r.procedure;
      g->row.n = r.n;
    }
    g->nss.push_back(r.metrics.nss);
    g->auc.push_back(r.metrics.auc);
    g->cc.push_back(r.metrics.cc);
    g->gate_sum += r.gate_rate;
  }
  std::vector<AggregateRow> out;
  for (Group& g : groups) {
    g.row.runs = static_cast<int>(g.nss.size());
    g.row.nss = mean_std(g.nss);
    g.row.auc = mean_std(g.auc);
    g.row.cc = mean_std(g.cc);
    g.row.mean_gate_rate = g.gate_sum / g.row.runs;
    out.push_back(g.row);
  }
  return out;
}

std::string format_table(const std::vector<AggregateRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"setting", "procedure", "n", "runs", "nss", "auc", "cc"});
  for (const AggregateRow& r : rows)
    cells.push_back({r.setting, r.procedure, std::to_string(r.n), std::to_string(r.runs),
                     format_mean_std(r.nss.mean, r.nss.std), format_mean_std(r.auc.mean, r.auc.std),
                     format_mean_std(r.cc.mean, r.cc.std)});
  std::vector<std::size_t> width(cells[0].size(), 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::string out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += row[c];
      if (c + 1 < row.size()) out.append(width[c] - row[c].size() + 2, ' ');
    }
    out += '\n';
  }
  return out;
}

SweepKind parse_sweep_kind(const std::string& name) {
  if (name == "n") return SweepKind::n;
  if (name == "epsilon") return SweepKind::epsilon;
  if (name == "layers") return SweepKind::layers;
  throw std::invalid_argument("unknown sweep kind '" + name + "' (n, epsilon or layers)");
}

std::vector<double> default_grid(SweepKind kind) {
  switch (kind) {
    case SweepKind::n: return {0, 1, 5, 10};
    case SweepKind::epsilon: return {-1.0, -0.5, 0.0, 0.5, 1.0};
    case SweepKind::layers: return {0, 1, 2, 3};
  }
  throw std::logic_error("unreachable");
}

std::string ablation_sweep(SweepKind kind, const std::vector<double>& grid,
                           const ExperimentConfig& cfg, bool verbose) {
  if (grid.empty()) throw std::invalid_argument("ablation_sweep: empty grid");
  std::string out = "kind,value,procedure,nss,auc,cc,gate_rate\n";
  const char* kind_name = kind == SweepKind::n        ? "n"
                          : kind == SweepKind::epsilon ? "epsilon"
                                                       : "layers";
  for (double value : grid) {
    ExperimentConfig point = cfg;
    switch (kind) {
      case SweepKind::n:
        point.n = static_cast<int>(value);
        if (point.n < 0 || point.n != value)
          throw std::invalid_argument("ablation_sweep: n grid values must be whole and >= 0");
        break;
      case SweepKind::epsilon:
        point.train.correction.epsilon = value;
        break;
      case SweepKind::layers:
        point.head_layers = static_cast<int>(value);
        if (point.head_layers < 0 || point.head_layers != value)
          throw std::invalid_argument("ablation_sweep: layer grid values must be whole and >= 0");
        break;
    }
    const std::vector<RunRecord> records = run_experiment(point, verbose);
    for (const AggregateRow& row : aggregate(records)) {
      out += kind_name;
      out += ',';
      out += fmt_g(value);
      out += ',';
      out += row.procedure;
      out += ',';
      out += format_mean_std(row.nss.mean, row.nss.std);
      out += ',';
      out += format_mean_std(row.auc.mean, row.auc.std);
      out += ',';
      out += format_mean_std(row.cc.mean, row.cc.std);
      out += ',';
      out += fmt_g(row.mean_gate_rate);
      out += '\n';
    }
  }
  return out;
}

}  // namespace salref
