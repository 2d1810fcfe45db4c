#include "stochlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace stochlab {

namespace {

[[noreturn]] void bad_config(std::size_t line, const std::string& message) {
  raise(Errc::config_invalid, "line " + std::to_string(line) + ": " + message);
}

std::string strip(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) {
    ++a;
  }
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) {
    --b;
  }
  return s.substr(a, b - a);
}

// Removes a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') {
      quoted = !quoted;
    } else if (s[i] == '#' && !quoted) {
      return s.substr(0, i);
    }
  }
  return s;
}

bool looks_numeric(const std::string& s) {
  if (s.empty()) {
    return false;
  }
  const char c = s[0];
  return std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.';
}

ConfigValue parse_scalar(const std::string& raw, std::size_t line) {
  ConfigValue v;
  if (raw == "true" || raw == "false") {
    v.type = ConfigValue::Type::boolean;
    v.b = (raw == "true");
    return v;
  }
  if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
    v.type = ConfigValue::Type::string;
    v.s = raw.substr(1, raw.size() - 2);
    return v;
  }
  if (looks_numeric(raw)) {
    const bool is_real = raw.find_first_of(".eE") != std::string::npos;
    try {
      std::size_t used = 0;
      if (is_real) {
        v.type = ConfigValue::Type::real;
        v.d = std::stod(raw, &used);
      } else {
        v.type = ConfigValue::Type::integer;
        v.i = std::stoll(raw, &used);
        v.d = static_cast<double>(v.i);
      }
      if (used != raw.size()) {
        bad_config(line, "malformed number '" + raw + "'");
      }
    } catch (const std::exception&) {
      bad_config(line, "malformed number '" + raw + "'");
    }
    return v;
  }
  bad_config(line, "unrecognized value '" + raw + "' (strings must be quoted)");
}

std::vector<std::string> split_top_level(const std::string& body, std::size_t line) {
  std::vector<std::string> parts;
  int depth = 0;
  bool quoted = false;
  std::string current;
  for (char c : body) {
    if (c == '"') {
      quoted = !quoted;
      current += c;
    } else if (!quoted && c == '[') {
      ++depth;
      current += c;
    } else if (!quoted && c == ']') {
      --depth;
      if (depth < 0) {
        bad_config(line, "unbalanced ']'");
      }
      current += c;
    } else if (!quoted && depth == 0 && c == ',') {
      parts.push_back(strip(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (quoted || depth != 0) {
    bad_config(line, "unbalanced brackets or quotes in array");
  }
  const std::string last = strip(current);
  if (!last.empty()) {
    parts.push_back(last);
  }
  return parts;
}

ConfigValue parse_value(const std::string& raw, std::size_t line) {
  if (raw.empty()) {
    bad_config(line, "empty value");
  }
  if (raw.front() != '[') {
    return parse_scalar(raw, line);
  }
  if (raw.back() != ']') {
    bad_config(line, "array does not end with ']'");
  }
  const std::vector<std::string> parts = split_top_level(raw.substr(1, raw.size() - 2), line);
  ConfigValue v;
  if (!parts.empty() && parts[0].front() == '[') {
    // matrix
    v.type = ConfigValue::Type::matrix;
    std::vector<std::vector<double>> rows;
    for (const std::string& part : parts) {
      ConfigValue row = parse_value(part, line);
      if (row.type != ConfigValue::Type::array || !row.s.empty()) {
        bad_config(line, "matrix rows must be numeric arrays");
      }
      rows.push_back(row.array);
    }
    const std::size_t cols = rows[0].size();
    v.matrix = Matrix(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != cols) {
        bad_config(line, "ragged matrix");
      }
      for (std::size_t j = 0; j < cols; ++j) {
        v.matrix(i, j) = rows[i][j];
      }
    }
    return v;
  }
  v.type = ConfigValue::Type::array;
  for (const std::string& part : parts) {
    ConfigValue item = parse_scalar(part, line);
    if (item.type == ConfigValue::Type::string) {
      // string arrays ride in s, '\n'-joined
      if (!v.array.empty()) {
        bad_config(line, "mixed string/number array");
      }
      v.s += item.s + "\n";
    } else if (item.type == ConfigValue::Type::integer ||
               item.type == ConfigValue::Type::real) {
      if (!v.s.empty()) {
        bad_config(line, "mixed string/number array");
      }
      v.array.push_back(item.d);
    } else {
      bad_config(line, "array items must be numbers or strings");
    }
  }
  return v;
}

}  // namespace

std::map<std::string, std::map<std::string, ConfigValue>> parse_config_text(
    const std::string& text) {
  std::map<std::string, std::map<std::string, ConfigValue>> sections;
  std::istringstream in(text);
  std::string raw_line;
  std::string section;
  std::size_t line_no = 0;
  std::string pending;
  std::size_t pending_line = 0;
  std::string pending_key;

  auto finish_pending = [&](const std::string& value_text) {
    sections[section][pending_key] = parse_value(strip(value_text), pending_line);
    pending.clear();
    pending_key.clear();
  };

  while (std::getline(in, raw_line)) {
    ++line_no;
    std::string line = strip(strip_comment(raw_line));
    if (!pending.empty()) {
      pending += " " + line;
      // keep accumulating until brackets balance
      int depth = 0;
      bool quoted = false;
      for (char c : pending) {
        if (c == '"') quoted = !quoted;
        if (!quoted && c == '[') ++depth;
        if (!quoted && c == ']') --depth;
      }
      if (depth == 0) {
        finish_pending(pending);
      }
      continue;
    }
    if (line.empty()) {
      continue;
    }
    if (line.front() == '[' && line.back() == ']' && line.find('=') == std::string::npos) {
      section = strip(line.substr(1, line.size() - 2));
      if (section.empty()) {
        bad_config(line_no, "empty section name");
      }
      if (sections.count(section) != 0) {
        bad_config(line_no, "duplicate section '" + section + "'");
      }
      sections[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      bad_config(line_no, "expected 'key = value' or '[section]'");
    }
    if (section.empty()) {
      bad_config(line_no, "key outside any section");
    }
    const std::string key = strip(line.substr(0, eq));
    const std::string value_text = strip(line.substr(eq + 1));
    if (key.empty()) {
      bad_config(line_no, "empty key");
    }
    if (sections[section].count(key) != 0) {
      bad_config(line_no, "duplicate key '" + key + "'");
    }
    // multi-line arrays: accumulate until brackets balance
    int depth = 0;
    bool quoted = false;
    for (char c : value_text) {
      if (c == '"') quoted = !quoted;
      if (!quoted && c == '[') ++depth;
      if (!quoted && c == ']') --depth;
    }
    if (depth > 0) {
      pending = value_text;
      pending_line = line_no;
      pending_key = key;
      continue;
    }
    sections[section][key] = parse_value(value_text, line_no);
  }
  if (!pending.empty()) {
    bad_config(pending_line, "unterminated array");
  }
  return sections;
}

namespace {

class SectionReader {
 public:
  SectionReader(const std::string& name, const std::map<std::string, ConfigValue>& values)
      : name_(name), values_(values) {}

  ~SectionReader() = default;

  void done() const {
    for (const auto& [key, value] : values_) {
      if (seen_.count(key) == 0) {
        raise(Errc::config_invalid, "unknown key '" + key + "' in [" + name_ + "]");
      }
    }
  }

  const ConfigValue* find(const std::string& key) const {
    seen_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
  }

  long long integer(const std::string& key, long long fallback) const {
    const ConfigValue* v = find(key);
    if (v == nullptr) {
      return fallback;
    }
    if (v->type != ConfigValue::Type::integer) {
      raise(Errc::config_invalid, "[" + name_ + "] " + key + " must be an integer");
    }
    return v->i;
  }

  double real(const std::string& key, double fallback) const {
    const ConfigValue* v = find(key);
    if (v == nullptr) {
      return fallback;
    }
    if (v->type != ConfigValue::Type::real && v->type != ConfigValue::Type::integer) {
      raise(Errc::config_invalid, "[" + name_ + "] " + key + " must be a number");
    }
    return v->d;
  }

  bool boolean(const std::string& key, bool fallback) const {
    const ConfigValue* v = find(key);
    if (v == nullptr) {
      return fallback;
    }
    if (v->type != ConfigValue::Type::boolean) {
      raise(Errc::config_invalid, "[" + name_ + "] " + key + " must be true or false");
    }
    return v->b;
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    const ConfigValue* v = find(key);
    if (v == nullptr) {
      return fallback;
    }
    if (v->type != ConfigValue::Type::string) {
      raise(Errc::config_invalid, "[" + name_ + "] " + key + " must be a quoted string");
    }
    return v->s;
  }

 private:
  std::string name_;
  const std::map<std::string, ConfigValue>& values_;
  mutable std::set<std::string> seen_;
};

const std::map<std::string, ConfigValue> kEmpty;

}  // namespace

RunConfig RunConfig::from_text(const std::string& text) {
  const auto sections = parse_config_text(text);
  static const std::set<std::string> known_sections = {
      "source", "model", "train", "probes", "spectral", "surplus", "output"};
  for (const auto& [name, values] : sections) {
    if (known_sections.count(name) == 0) {
      raise(Errc::config_invalid, "unknown section [" + name + "]");
    }
  }
  auto section = [&](const char* name) -> const std::map<std::string, ConfigValue>& {
    auto it = sections.find(name);
    return it == sections.end() ? kEmpty : it->second;
  };

  RunConfig config;
  config.text = text;

  {
    SectionReader r("source", section("source"));
    config.source.kind = r.text("kind", "random");
    config.source.vocab_size = static_cast<std::size_t>(r.integer("vocab_size", 4));
    config.source.order = static_cast<std::size_t>(r.integer("order", 1));
    config.source.gamma = r.real("gamma", 1.0);
    config.source.wobble = r.real("wobble", 0.05);
    config.source.seed = static_cast<std::uint64_t>(r.integer("seed", 0));
    if (const ConfigValue* v = r.find("transition")) {
      if (v->type != ConfigValue::Type::matrix) {
        raise(Errc::config_invalid, "[source] transition must be a matrix");
      }
      config.source.transition = v->matrix;
    }
    r.done();
    static const std::set<std::string> kinds = {"random", "explicit", "surplus", "two_cluster"};
    if (kinds.count(config.source.kind) == 0) {
      raise(Errc::config_invalid, "unknown source kind '" + config.source.kind + "'");
    }
    if (config.source.kind == "explicit" && !config.source.transition.has_value()) {
      raise(Errc::config_invalid, "[source] kind \"explicit\" needs a transition matrix");
    }
    if (config.source.vocab_size < 2) {
      raise(Errc::config_invalid, "[source] vocab_size must be >= 2");
    }
    if (config.source.order < 1) {
      raise(Errc::config_invalid, "[source] order must be >= 1");
    }
  }
  {
    SectionReader r("model", section("model"));
    config.model.d_emb = static_cast<std::size_t>(r.integer("d_emb", 4));
    config.model.d_model = static_cast<std::size_t>(r.integer("d_model", 8));
    config.model.tabular = r.boolean("tabular", false);
    config.model.draft_horizon = static_cast<std::size_t>(r.integer("draft_horizon", 0));
    r.done();
  }
  {
    SectionReader r("train", section("train"));
    config.train.learning_rate = r.real("learning_rate", 0.2);
    const long long epochs = r.integer("epochs", 500);
    config.train.seed = static_cast<std::uint64_t>(r.integer("seed", 1));
    const std::string optimizer = r.text("optimizer", "gd");
    config.train.momentum_beta = r.real("momentum_beta", 0.9);
    config.train.weight_init_scale = r.real("weight_init_scale", 0.1);
    config.train.log_every = static_cast<std::size_t>(r.integer("log_every", 50));
    r.done();
    if (optimizer == "gd") {
      config.train.momentum = false;
    } else if (optimizer == "momentum") {
      config.train.momentum = true;
    } else {
      raise(Errc::config_invalid, "unknown optimizer '" + optimizer + "'");
    }
    if (!(config.train.learning_rate > 0.0)) {
      raise(Errc::config_invalid, "[train] learning_rate must be positive");
    }
    if (epochs < 1) {
      raise(Errc::config_invalid, "[train] epochs must be >= 1");
    }
    config.train.epochs = static_cast<std::size_t>(epochs);
  }
  {
    SectionReader r("probes", section("probes"));
    config.probes.losses = r.boolean("losses", false);
    config.probes.entropy = r.boolean("entropy", false);
    config.probes.surplus = r.boolean("surplus", false);
    config.probes.geometry = r.boolean("geometry", false);
    config.probes.spectral = r.boolean("spectral", false);
    config.probes.verify = r.boolean("verify", false);
    r.done();
  }
  {
    SectionReader r("spectral", section("spectral"));
    const std::string kind = r.text("kind", "bc");
    const double beta = r.real("beta", 1.0);
    r.done();
    config.spectral_kind = SimilarityKindSpec::parse(kind, beta);
  }
  {
    SectionReader r("surplus", section("surplus"));
    const long long horizon = r.integer("horizon", 2);
    r.done();
    if (horizon < 1 || static_cast<std::size_t>(horizon) > kMaxHorizon) {
      raise(Errc::config_invalid, "[surplus] horizon out of range");
    }
    config.surplus_horizon = static_cast<std::size_t>(horizon);
  }
  {
    SectionReader r("output", section("output"));
    config.output_dir = r.text("directory", "out");
    if (const ConfigValue* v = r.find("formats")) {
      if (v->type != ConfigValue::Type::array || !v->array.empty()) {
        // string array rides in s
      }
      config.formats.clear();
      std::istringstream ss(v->s);
      std::string fmt;
      while (std::getline(ss, fmt)) {
        if (fmt.empty()) {
          continue;
        }
        if (fmt != "csv" && fmt != "json") {
          raise(Errc::config_invalid, "unknown output format '" + fmt + "'");
        }
        config.formats.push_back(fmt);
      }
      if (config.formats.empty()) {
        raise(Errc::config_invalid, "[output] formats must not be empty");
      }
    }
    r.done();
  }
  return config;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    raise(Errc::io_failure, "cannot open config file '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

}  // namespace stochlab
