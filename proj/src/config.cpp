#include "salref/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace salref {

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
  throw std::runtime_error("config line " + std::to_string(line) + ": " + msg);
}

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& value, int line, const std::string& key) {
  T out{};
  const char* begin = value.c_str();
  const char* end = begin + value.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc{} || ptr != end)
    fail(line, "malformed value '" + value + "' for key '" + key + "'");
  return out;
}

DomainKind parse_kind(const std::string& value, int line, const std::string& key) {
  if (value == "natural_like") return DomainKind::natural_like;
  if (value == "webpage_like") return DomainKind::webpage_like;
  fail(line, "malformed value '" + value + "' for key '" + key +
                 "' (expected natural_like or webpage_like)");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : value) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Shared scaffolding for both config dialects: strips comments, splits
// key = value, hands pairs to the dialect-specific apply function.
template <typename Apply>
void parse_lines(const std::string& text, Apply&& apply) {
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string stripped = trim(raw);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value', got '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) fail(line, "empty key");
    if (value.empty()) fail(line, "empty value for key '" + key + "'");
    apply(key, value, line);
  }
}

bool apply_domain_key(DomainSpec& spec, const std::string& key, const std::string& value,
                      int line) {
  if (key == "kind") spec.kind = parse_kind(value, line, key);
  else if (key == "height") spec.height = parse_number<int>(value, line, key);
  else if (key == "width") spec.width = parse_number<int>(value, line, key);
  else if (key == "channels") spec.channels = parse_number<int>(value, line, key);
  else if (key == "min_blobs") spec.min_blobs = parse_number<int>(value, line, key);
  else if (key == "max_blobs") spec.max_blobs = parse_number<int>(value, line, key);
  else if (key == "blob_scale_min") spec.blob_scale_min = parse_number<double>(value, line, key);
  else if (key == "blob_scale_max") spec.blob_scale_max = parse_number<double>(value, line, key);
  else if (key == "mixing_seed") spec.mixing_seed = parse_number<uint64_t>(value, line, key);
  else if (key == "mixing_min") spec.mixing_min = parse_number<double>(value, line, key);
  else if (key == "mixing_max") spec.mixing_max = parse_number<double>(value, line, key);
  else if (key == "fixations_per_image")
    spec.fixations_per_image = parse_number<int>(value, line, key);
  else if (key == "blur_sigma") spec.blur_sigma = parse_number<double>(value, line, key);
  else if (key == "noise_level") spec.noise_level = parse_number<double>(value, line, key);
  else return false;
  return true;
}

const std::set<std::string> kProcedures = {"tr", "tr_ref", "ft", "ft_ref", "ft_wo_tr", "eub"};

}  // namespace

ExperimentConfig::ExperimentConfig() {
  source_spec.kind = DomainKind::natural_like;
  source_spec.mixing_seed = 1;
  target_spec.kind = DomainKind::webpage_like;
  target_spec.mixing_seed = 2;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  parse_lines(text, [&](const std::string& key, const std::string& value, int line) {
    TrainConfig& t = cfg.train;
    if (key == "setting") cfg.setting = value;
    else if (key == "n") cfg.n = parse_number<int>(value, line, key);
    else if (key == "n_r") t.n_r = parse_number<int>(value, line, key);
    else if (key == "procedures") cfg.procedures = split_list(value);
    else if (key == "repeats") cfg.repeats = parse_number<int>(value, line, key);
    else if (key == "base_seed") cfg.base_seed = parse_number<uint64_t>(value, line, key);
    else if (key == "head_layers") cfg.head_layers = parse_number<int>(value, line, key);
    else if (key == "hidden_channels") cfg.hidden_channels = parse_number<int>(value, line, key);
    else if (key == "lr") t.lr = parse_number<double>(value, line, key);
    else if (key == "weight_decay") t.weight_decay = parse_number<double>(value, line, key);
    else if (key == "batch_size") t.batch_size = parse_number<int>(value, line, key);
    else if (key == "epochs") t.epochs = parse_number<int>(value, line, key);
    else if (key == "selection_metric") t.selection_metric = value;
    else if (key == "epsilon") t.correction.epsilon = parse_number<double>(value, line, key);
    else if (key == "lambda") t.correction.lambda = parse_number<double>(value, line, key);
    else if (key == "inner_steps") t.correction.inner_steps = parse_number<int>(value, line, key);
    else if (key == "inner_step_size")
      t.correction.inner_step_size = parse_number<double>(value, line, key);
    else if (key == "backtracking_halvings")
      t.correction.backtracking_halvings = parse_number<int>(value, line, key);
    else if (key == "source_kind") cfg.source_spec.kind = parse_kind(value, line, key);
    else if (key == "target_kind") cfg.target_spec.kind = parse_kind(value, line, key);
    else if (key == "source_count") cfg.source_count = parse_number<int>(value, line, key);
    else if (key == "target_count") cfg.target_count = parse_number<int>(value, line, key);
    else if (key == "eval_count") cfg.eval_count = parse_number<int>(value, line, key);
    else if (key == "source_mixing_seed")
      cfg.source_spec.mixing_seed = parse_number<uint64_t>(value, line, key);
    else if (key == "target_mixing_seed")
      cfg.target_spec.mixing_seed = parse_number<uint64_t>(value, line, key);
    else if (key == "height" || key == "width" || key == "channels" ||
             key == "fixations_per_image" || key == "blur_sigma" || key == "noise_level") {
      apply_domain_key(cfg.source_spec, key, value, line);
      apply_domain_key(cfg.target_spec, key, value, line);
    } else if (key == "source_path") cfg.source_path = value;
    else if (key == "target_path") cfg.target_path = value;
    else if (key == "csv") cfg.csv_path = value;
    else fail(line, "unknown key '" + key + "'");
  });

  if (cfg.n < 0) throw std::runtime_error("config: n must be >= 0");
  if (cfg.repeats < 1) throw std::runtime_error("config: repeats must be >= 1");
  if (cfg.train.batch_size < 1) throw std::runtime_error("config: batch_size must be >= 1");
  if (cfg.train.epochs < 1) throw std::runtime_error("config: epochs must be >= 1");
  if (cfg.train.lr <= 0) throw std::runtime_error("config: lr must be > 0");
  if (cfg.head_layers < 0) throw std::runtime_error("config: head_layers must be >= 0");
  if (cfg.hidden_channels < 1) throw std::runtime_error("config: hidden_channels must be >= 1");
  if (cfg.source_count < 2 || cfg.target_count < 1 || cfg.eval_count < 1)
    throw std::runtime_error("config: dataset counts too small");
  if (cfg.eval_count > cfg.target_count)
    throw std::runtime_error("config: eval_count exceeds target_count");
  if (cfg.train.selection_metric != "nss" && cfg.train.selection_metric != "auc" &&
      cfg.train.selection_metric != "cc")
    throw std::runtime_error("config: selection_metric must be nss, auc or cc");
  if (cfg.procedures.empty()) throw std::runtime_error("config: procedures must be non-empty");
  for (const auto& p : cfg.procedures)
    if (!kProcedures.count(p)) throw std::runtime_error("config: unknown procedure '" + p + "'");
  if (cfg.n > cfg.target_count - cfg.eval_count)
    throw std::runtime_error("config: n exceeds the target reference pool");
  if (cfg.setting.find(',') != std::string::npos)
    throw std::runtime_error("config: setting label may not contain commas");
  if (cfg.source_spec.channels != cfg.target_spec.channels ||
      cfg.source_spec.height != cfg.target_spec.height ||
      cfg.source_spec.width != cfg.target_spec.width)
    throw std::runtime_error("config: source and target shapes must match");

  if (cfg.setting.empty()) {
    auto kind_name = [](DomainKind k) {
      return k == DomainKind::natural_like ? "natural_like" : "webpage_like";
    };
    cfg.setting = std::string(kind_name(cfg.source_spec.kind)) + "/conv" +
                  std::to_string(cfg.hidden_channels) + "/" + kind_name(cfg.target_spec.kind);
  }
  return cfg;
}

GenSpec parse_gen_spec(const std::string& text) {
  GenSpec spec;
  bool saw_kind = false, saw_count = false;
  parse_lines(text, [&](const std::string& key, const std::string& value, int line) {
    if (key == "count") {
      spec.count = parse_number<int>(value, line, key);
      saw_count = true;
    } else if (key == "seed") {
      spec.seed = parse_number<uint64_t>(value, line, key);
    } else if (key == "tag") {
      if (value == "source") spec.tag = DomainTag::source;
      else if (value == "target") spec.tag = DomainTag::target;
      else fail(line, "malformed value '" + value + "' for key 'tag'");
    } else if (apply_domain_key(spec.domain, key, value, line)) {
      if (key == "kind") saw_kind = true;
    } else {
      fail(line, "unknown key '" + key + "'");
    }
  });
  if (!saw_kind) throw std::runtime_error("gen spec: missing required key 'kind'");
  if (!saw_count) throw std::runtime_error("gen spec: missing required key 'count'");
  if (spec.count < 1) throw std::runtime_error("gen spec: count must be >= 1");
  return spec;
}

namespace {
std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}
}  // namespace

ExperimentConfig load_config_file(const std::string& path) { return parse_config(slurp(path)); }

GenSpec load_gen_spec_file(const std::string& path) { return parse_gen_spec(slurp(path)); }

}  // namespace salref
