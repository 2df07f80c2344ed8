#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <system_error>

#include "twoend/cli_io.hpp"
#include "twoend/errors.hpp"

namespace twoend::cli {

std::string to_string(Mode m) {
  switch (m) {
    case Mode::solve: return "solve";
    case Mode::continue_branch: return "continue";
    case Mode::reduced: return "reduced";
    case Mode::probe: return "probe";
    case Mode::verify: return "verify";
  }
  return "?";
}

std::string to_string(AnsatzKind a) { return a == AnsatzKind::catenoid ? "catenoid" : "toda"; }

std::string to_string(Direction d) {
  switch (d) {
    case Direction::down: return "down";
    case Direction::up: return "up";
    case Direction::both: return "both";
  }
  return "?";
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  std::ostringstream os;
  if (line > 0) os << "line " << line << ": ";
  os << msg;
  throw ConfigError(os.str(), line);
}

template <class T>
T parse_number(std::string_view key, std::string_view text, int line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    fail(line, std::string(key) + ": expected a number, got '" + std::string(text) + "'");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) fail(line, std::string(key) + ": value must be finite");
  }
  return value;
}

template <class T>
std::string format_number(T value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

template <class E>
E parse_choice(std::string_view key, std::string_view text, int line,
               std::initializer_list<std::pair<std::string_view, E>> choices) {
  std::string allowed;
  for (const auto& [name, value] : choices) {
    if (name == text) return value;
    allowed += allowed.empty() ? "" : "|";
    allowed += name;
  }
  fail(line, std::string(key) + ": expected one of " + allowed + ", got '" + std::string(text) + "'");
}

struct Key {
  std::string name;
  std::function<void(RunConfig&, std::string_view, int)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
Key number_key(std::string name, T RunConfig::*member) {
  return {name,
          [name, member](RunConfig& c, std::string_view v, int line) { c.*member = parse_number<T>(name, v, line); },
          [member](const RunConfig& c) { return format_number(c.*member); }};
}

Key bool_key(std::string name, bool RunConfig::*member) {
  return {name,
          [name, member](RunConfig& c, std::string_view v, int line) {
            c.*member = parse_choice<bool>(name, v, line, {{"true", true}, {"false", false}});
          },
          [member](const RunConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> t;
    t.push_back({"mode",
                 [](RunConfig& c, std::string_view v, int line) {
                   c.mode = parse_choice<Mode>("mode", v, line,
                                               {{"solve", Mode::solve},
                                                {"continue", Mode::continue_branch},
                                                {"reduced", Mode::reduced},
                                                {"probe", Mode::probe},
                                                {"verify", Mode::verify}});
                 },
                 [](const RunConfig& c) { return to_string(c.mode); }});
    t.push_back({"out", [](RunConfig& c, std::string_view v, int) { c.out = std::string(v); },
                 [](const RunConfig& c) { return c.out; }});
    t.push_back(number_key("threads", &RunConfig::threads));
    t.push_back(number_key("seed", &RunConfig::seed));
    t.push_back(number_key("R", &RunConfig::R));
    t.push_back(number_key("Z", &RunConfig::Z));
    t.push_back(number_key("h", &RunConfig::h));
    t.push_back({"ansatz",
                 [](RunConfig& c, std::string_view v, int line) {
                   c.ansatz = parse_choice<AnsatzKind>("ansatz", v, line,
                                                       {{"catenoid", AnsatzKind::catenoid},
                                                        {"toda", AnsatzKind::toda}});
                 },
                 [](const RunConfig& c) { return to_string(c.ansatz); }});
    t.push_back(number_key("k", &RunConfig::k));
    t.push_back(number_key("b", &RunConfig::b));
    t.push_back(number_key("eps", &RunConfig::eps));
    t.push_back(number_key("newton_tol", &RunConfig::newton_tol));
    t.push_back(number_key("newton_max_iter", &RunConfig::newton_max_iter));
    t.push_back(bool_key("decompose", &RunConfig::decompose));
    t.push_back({"direction",
                 [](RunConfig& c, std::string_view v, int line) {
                   c.direction = parse_choice<Direction>(
                       "direction", v, line,
                       {{"down", Direction::down}, {"up", Direction::up}, {"both", Direction::both}});
                 },
                 [](const RunConfig& c) { return to_string(c.direction); }});
    t.push_back(number_key("max_points", &RunConfig::max_points));
    t.push_back(number_key("first_dk", &RunConfig::first_dk));
    t.push_back(number_key("max_dk", &RunConfig::max_dk));
    t.push_back(number_key("k_floor", &RunConfig::k_floor));
    t.push_back(number_key("k_ceiling", &RunConfig::k_ceiling));
    t.push_back(bool_key("dump_branch_fields", &RunConfig::dump_branch_fields));
    t.push_back(number_key("k_target", &RunConfig::k_target));
    t.push_back(number_key("trials", &RunConfig::trials));
    t.push_back(number_key("p0_min", &RunConfig::p0_min));
    t.push_back(number_key("p0_max", &RunConfig::p0_max));
    t.push_back(number_key("forcing", &RunConfig::forcing));
    t.push_back(number_key("r0", &RunConfig::r0));
    t.push_back(number_key("r_end", &RunConfig::r_end));
    t.push_back(bool_key("small_slope", &RunConfig::small_slope));
    t.push_back(number_key("rel_tol", &RunConfig::rel_tol));
    t.push_back(number_key("abs_tol", &RunConfig::abs_tol));
    return t;
  }();
  return table;
}

void check_constraints(const RunConfig& c, const std::map<std::string, int>& lines) {
  auto line_of = [&](const std::string& key) {
    const auto it = lines.find(key);
    return it == lines.end() ? 0 : it->second;
  };
  auto positive = [&](const std::string& key, double v) {
    if (!(v > 0.0)) fail(line_of(key), key + " = " + format_number(v) + " must be positive");
  };
  for (const auto& [key, v] : {std::pair<std::string, double>{"R", c.R}, {"Z", c.Z}, {"h", c.h},
                               {"newton_tol", c.newton_tol}, {"first_dk", c.first_dk},
                               {"max_dk", c.max_dk}, {"k_floor", c.k_floor}, {"k_target", c.k_target},
                               {"p0_min", c.p0_min}, {"r0", c.r0}, {"rel_tol", c.rel_tol},
                               {"abs_tol", c.abs_tol}, {"eps", c.eps}})
    positive(key, v);
  if (c.h > 0.25) fail(line_of("h"), "h = " + format_number(c.h) + " exceeds the maximum grid spacing 0.25");
  if (c.threads < 0) fail(line_of("threads"), "threads must be >= 0");
  if (c.newton_max_iter < 1) fail(line_of("newton_max_iter"), "newton_max_iter must be >= 1");
  if (c.max_points < 2) fail(line_of("max_points"), "max_points must be >= 2");
  if (c.trials < 1) fail(line_of("trials"), "trials must be >= 1");
  if (c.p0_max < c.p0_min) fail(line_of("p0_max"), "p0_max must be >= p0_min");
  if (c.r_end <= c.r0) fail(line_of("r_end"), "r_end must exceed r0");
  if (c.forcing < 0.0) fail(line_of("forcing"), "forcing must be >= 0");
  if (c.out.empty()) fail(line_of("out"), "out must not be empty");
  if (c.out.find_first_of("#\n") != std::string::npos) fail(line_of("out"), "out must not contain '#'");

  if (c.mode == Mode::solve || c.mode == Mode::continue_branch) {
    if (c.ansatz == AnsatzKind::toda)
      fail(line_of("ansatz"), "ansatz = toda has growth rate sqrt2; " + to_string(c.mode) +
                                  " requires a catenoid ansatz with k > sqrt2");
    if (!(c.k > std::numbers::sqrt2))
      fail(line_of("k"), "k = " + format_number(c.k) + " violates k > sqrt2 (= 1.41421...) required for " +
                             to_string(c.mode));
    if (c.k >= c.R) fail(line_of("k"), "k must be smaller than R");
    if (c.mode == Mode::continue_branch && c.k_floor >= c.k)
      fail(line_of("k_floor"), "k_floor must be below k");
    if (c.mode == Mode::continue_branch && c.k_ceiling <= c.k)
      fail(line_of("k_ceiling"), "k_ceiling must exceed k");
  }
}

}  // namespace

RunConfig validate_config(std::string_view text) {
  RunConfig config;
  std::map<std::string, int> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected key = value, got '" + std::string(line) + "'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "missing key before '='");
    const auto& table = keys();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) { return k.name == key; });
    if (it == table.end()) fail(line_no, "unknown key '" + key + "'");
    if (seen.count(key)) fail(line_no, "duplicate key '" + key + "' (first set on line " +
                                           std::to_string(seen[key]) + ")");
    if (value.empty()) fail(line_no, key + ": missing value");
    it->set(config, value, line_no);
    seen[key] = line_no;
  }
  if (!seen.count("mode")) fail(0, "mode required");
  check_constraints(config, seen);
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string(), 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  return validate_config(buf.str());
}

std::string emit_config(const RunConfig& config) {
  std::string out;
  for (const auto& key : keys()) out += key.name + " = " + key.get(config) + "\n";
  return out;
}

}  // namespace twoend::cli
