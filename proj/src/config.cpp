#include "cavity/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace cavity::io {

const char* to_string(Command c) {
  switch (c) {
    case Command::sweep: return "sweep";
    case Command::spectrum: return "spectrum";
    case Command::dynamics: return "dynamics";
    case Command::roots: return "roots";
  }
  return "?";
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

using Section = std::map<std::string, Entry>;

struct RawConfig {
  std::map<std::string, Section> sections;
  std::string origin;

  [[noreturn]] void fail(int line, const std::string& what) const {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + what);
  }
};

RawConfig tokenize(const std::string& text, const std::string& origin) {
  RawConfig raw;
  raw.origin = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '#' || sv.front() == ';') continue;
    if (sv.front() == '[') {
      if (sv.back() != ']') raw.fail(lineno, "unterminated section header");
      section = std::string(trim(sv.substr(1, sv.size() - 2)));
      if (section.empty()) raw.fail(lineno, "empty section name");
      raw.sections[section];  // a section may legitimately stay empty
      continue;
    }
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos) raw.fail(lineno, "expected key = value");
    if (section.empty()) raw.fail(lineno, "key outside any [section]");
    std::string key(trim(sv.substr(0, eq)));
    std::string value(trim(sv.substr(eq + 1)));
    if (key.empty()) raw.fail(lineno, "empty key");
    auto [it, inserted] = raw.sections[section].emplace(key, Entry{value, lineno, false});
    if (!inserted) raw.fail(lineno, "duplicate key '" + key + "' in [" + section + "]");
  }
  return raw;
}

class Reader {
 public:
  Reader(RawConfig& raw, const std::string& section) : raw_(raw), name_(section) {
    auto it = raw.sections.find(section);
    sec_ = it == raw.sections.end() ? nullptr : &it->second;
  }

  bool present() const { return sec_ != nullptr; }

  double number(const std::string& key) {
    Entry& e = require(key);
    return parse_number(e);
  }

  double number_or(const std::string& key, double fallback) {
    Entry* e = find(key);
    return e ? parse_number(*e) : fallback;
  }

  std::size_t count(const std::string& key) {
    Entry& e = require(key);
    const double v = parse_number(e);
    if (!(v >= 1.0) || v != std::floor(v)) raw_.fail(e.line, "'" + key + "' must be a positive integer");
    return std::size_t(v);
  }

  std::size_t count_or(const std::string& key, std::size_t fallback) {
    Entry* e = find(key);
    if (!e) return fallback;
    const double v = parse_number(*e);
    if (!(v >= 0.0) || v != std::floor(v)) raw_.fail(e->line, "'" + key + "' must be a non-negative integer");
    return std::size_t(v);
  }

  bool flag_or(const std::string& key, bool fallback) {
    Entry* e = find(key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
    if (e->value == "false" || e->value == "0" || e->value == "no") return false;
    raw_.fail(e->line, "'" + key + "' must be true or false");
  }

  std::string text_or(const std::string& key, const std::string& fallback) {
    Entry* e = find(key);
    return e ? e->value : fallback;
  }

  Entry* find(const std::string& key) {
    if (!sec_) return nullptr;
    auto it = sec_->find(key);
    if (it == sec_->end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  Entry& require(const std::string& key) {
    Entry* e = find(key);
    if (!e) throw ConfigError(raw_.origin + ": missing key '" + key + "' in [" + name_ + "]");
    return *e;
  }

  void finish() {
    if (!sec_) return;
    for (auto& [key, entry] : *sec_)
      if (!entry.used) raw_.fail(entry.line, "unknown key '" + key + "' in [" + name_ + "]");
  }

 private:
  double parse_number(Entry& e) {
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) raw_.fail(e.line, "cannot parse number '" + e.value + "'");
    return v;
  }

  RawConfig& raw_;
  std::string name_;
  Section* sec_;
};

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RawConfig raw = tokenize(text, origin);
  for (const auto& [name, sec] : raw.sections) {
    static const std::set<std::string> known = {"params", "bins",     "solver", "sweep",
                                                "spectrum", "dynamics", "roots",  "output"};
    if (!known.count(name))
      raw.fail(sec.empty() ? 0 : sec.begin()->second.line, "unknown section [" + name + "]");
  }

  RunConfig cfg;

  {
    Reader params(raw, "params");
    if (!params.present()) throw ConfigError(origin + ": missing [params] section");
    for (const char* key : {"g0", "kappa", "gamma", "gamma_d", "delta_omega", "n_atoms", "eta"})
      cfg.params_khz[key] = params.number(key);
    params.finish();
    try {
      cfg.params = params_from_linear_khz(cfg.params_khz);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(origin + ": [params]: " + e.what());
    }
  }

  {
    Reader bins(raw, "bins");
    const std::string fallback = cfg.params.delta_omega > 0.0 ? "adaptive_lorentzian" : "delta";
    const std::string name = bins.text_or("strategy", fallback);
    cfg.bins.strategy = bin_strategy_from_string(name);
    cfg.bins.nodes = bins.count_or("nodes", 0);
    bins.finish();
    if (cfg.params.delta_omega == 0.0 && cfg.bins.strategy != BinStrategy::delta)
      throw ConfigError(origin + ": [bins]: delta_omega = 0 requires strategy = delta");
    if (cfg.params.delta_omega > 0.0 && cfg.bins.strategy == BinStrategy::delta &&
        cfg.bins.nodes > 1)
      throw ConfigError(origin + ": [bins]: delta strategy admits exactly one node");
  }

  {
    Reader solver(raw, "solver");
    cfg.solve.scan_points = solver.count_or("scan_points", 400);
    cfg.solve.tol_rel = solver.number_or("tol_rel", 1e-10);
    cfg.solve.tol_abs_factor = solver.number_or("tol_abs_factor", 1e-14);
    cfg.solve.classify = solver.flag_or("classify", false);
    const std::string branch = solver.text_or("branch", "lowest");
    if (branch == "lowest")
      cfg.solve.branch = BranchPolicy::lowest;
    else if (branch == "highest")
      cfg.solve.branch = BranchPolicy::highest;
    else if (branch == "nearest")
      cfg.solve.branch = BranchPolicy::nearest;
    else
      throw ConfigError(origin + ": [solver]: unknown branch policy '" + branch + "'");
    cfg.solve.branch_hint = solver.number_or("branch_hint", 0.0);
    solver.finish();
    if (!(cfg.solve.tol_rel > 0.0) || !(cfg.solve.tol_abs_factor > 0.0))
      throw ConfigError(origin + ": [solver]: tolerances must be > 0");
  }

  int command_blocks = 0;
  if (raw.sections.count("sweep")) {
    ++command_blocks;
    cfg.command = Command::sweep;
    Reader r(raw, "sweep");
    cfg.sweep.c_min_khz = r.number("delta_c_min_khz");
    cfg.sweep.c_max_khz = r.number("delta_c_max_khz");
    cfg.sweep.c_points = r.count("delta_c_points");
    cfg.sweep.p_min_khz = r.number("delta_p_min_khz");
    cfg.sweep.p_max_khz = r.number("delta_p_max_khz");
    cfg.sweep.p_points = r.count("delta_p_points");
    r.finish();
  }
  if (raw.sections.count("spectrum")) {
    ++command_blocks;
    cfg.command = Command::spectrum;
    Reader r(raw, "spectrum");
    cfg.spectrum.delta_c_khz = r.number("delta_c_khz");
    cfg.spectrum.p_min_khz = r.number("delta_p_min_khz");
    cfg.spectrum.p_max_khz = r.number("delta_p_max_khz");
    cfg.spectrum.p_points = r.count("delta_p_points");
    r.finish();
  }
  if (raw.sections.count("dynamics")) {
    ++command_blocks;
    cfg.command = Command::dynamics;
    Reader r(raw, "dynamics");
    cfg.dynamics.delta_c_khz = r.number("delta_c_khz");
    cfg.dynamics.delta_p_khz = r.number("delta_p_khz");
    cfg.dynamics.settle = r.flag_or("settle", false);
    cfg.dynamics.t_end_s = r.number_or("t_end_s", 0.0);
    cfg.dynamics.horizon_s = r.number_or("horizon_s", 0.0);
    cfg.dynamics.criterion = r.number_or("criterion", 1e-7);
    cfg.dynamics.rtol = r.number_or("rtol", 1e-8);
    cfg.dynamics.atol = r.number_or("atol", 1e-12);
    const std::string init = r.text_or("initial", "ground");
    if (init == "ground")
      cfg.dynamics.initial = InitialState::ground;
    else if (init == "saturated")
      cfg.dynamics.initial = InitialState::saturated;
    else
      throw ConfigError(origin + ": [dynamics]: unknown initial state '" + init + "'");
    r.finish();
    if (cfg.dynamics.settle && !(cfg.dynamics.horizon_s > 0.0))
      throw ConfigError(origin + ": [dynamics]: settle = true requires horizon_s > 0");
    if (!cfg.dynamics.settle && !(cfg.dynamics.t_end_s > 0.0))
      throw ConfigError(origin + ": [dynamics]: t_end_s > 0 required (or settle = true)");
  }
  if (raw.sections.count("roots")) {
    ++command_blocks;
    cfg.command = Command::roots;
    Reader r(raw, "roots");
    cfg.roots.delta_c_khz = r.number("delta_c_khz");
    cfg.roots.delta_p_khz = r.number("delta_p_khz");
    r.finish();
  }
  if (command_blocks != 1)
    throw ConfigError(origin + ": exactly one of [sweep], [spectrum], [dynamics], [roots] required (found " +
                      std::to_string(command_blocks) + ")");

  {
    Reader out(raw, "output");
    cfg.output.dir = out.text_or("dir", ".");
    cfg.output.prefix = out.text_or("prefix", to_string(cfg.command));
    cfg.output.format = out.text_or("format", "csv");
    cfg.output.image = out.flag_or("image", false);
    cfg.output.overlay_dressed = out.flag_or("overlay_dressed", false);
    out.finish();
    if (cfg.output.format != "csv" && cfg.output.format != "json" && cfg.output.format != "both")
      throw ConfigError(origin + ": [output]: format must be csv, json or both");
  }

  return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

std::string render_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "[params]\n";
  for (const char* key : {"g0", "kappa", "gamma", "gamma_d", "delta_omega", "n_atoms", "eta"})
    out << key << " = " << format_double(cfg.params_khz.at(key)) << "\n";

  out << "\n[bins]\n";
  out << "strategy = " << to_string(cfg.bins.strategy) << "\n";
  out << "nodes = " << cfg.bins.nodes << "\n";

  out << "\n[solver]\n";
  out << "scan_points = " << cfg.solve.scan_points << "\n";
  out << "tol_rel = " << format_double(cfg.solve.tol_rel) << "\n";
  out << "tol_abs_factor = " << format_double(cfg.solve.tol_abs_factor) << "\n";
  out << "classify = " << (cfg.solve.classify ? "true" : "false") << "\n";
  out << "branch = " << to_string(cfg.solve.branch) << "\n";
  out << "branch_hint = " << format_double(cfg.solve.branch_hint) << "\n";

  switch (cfg.command) {
    case Command::sweep:
      out << "\n[sweep]\n";
      out << "delta_c_min_khz = " << format_double(cfg.sweep.c_min_khz) << "\n";
      out << "delta_c_max_khz = " << format_double(cfg.sweep.c_max_khz) << "\n";
      out << "delta_c_points = " << cfg.sweep.c_points << "\n";
      out << "delta_p_min_khz = " << format_double(cfg.sweep.p_min_khz) << "\n";
      out << "delta_p_max_khz = " << format_double(cfg.sweep.p_max_khz) << "\n";
      out << "delta_p_points = " << cfg.sweep.p_points << "\n";
      break;
    case Command::spectrum:
      out << "\n[spectrum]\n";
      out << "delta_c_khz = " << format_double(cfg.spectrum.delta_c_khz) << "\n";
      out << "delta_p_min_khz = " << format_double(cfg.spectrum.p_min_khz) << "\n";
      out << "delta_p_max_khz = " << format_double(cfg.spectrum.p_max_khz) << "\n";
      out << "delta_p_points = " << cfg.spectrum.p_points << "\n";
      break;
    case Command::dynamics:
      out << "\n[dynamics]\n";
      out << "delta_c_khz = " << format_double(cfg.dynamics.delta_c_khz) << "\n";
      out << "delta_p_khz = " << format_double(cfg.dynamics.delta_p_khz) << "\n";
      out << "settle = " << (cfg.dynamics.settle ? "true" : "false") << "\n";
      out << "t_end_s = " << format_double(cfg.dynamics.t_end_s) << "\n";
      out << "horizon_s = " << format_double(cfg.dynamics.horizon_s) << "\n";
      out << "criterion = " << format_double(cfg.dynamics.criterion) << "\n";
      out << "rtol = " << format_double(cfg.dynamics.rtol) << "\n";
      out << "atol = " << format_double(cfg.dynamics.atol) << "\n";
      out << "initial = " << (cfg.dynamics.initial == InitialState::ground ? "ground" : "saturated")
          << "\n";
      break;
    case Command::roots:
      out << "\n[roots]\n";
      out << "delta_c_khz = " << format_double(cfg.roots.delta_c_khz) << "\n";
      out << "delta_p_khz = " << format_double(cfg.roots.delta_p_khz) << "\n";
      break;
  }

  out << "\n[output]\n";
  out << "dir = " << cfg.output.dir << "\n";
  out << "prefix = " << cfg.output.prefix << "\n";
  out << "format = " << cfg.output.format << "\n";
  out << "image = " << (cfg.output.image ? "true" : "false") << "\n";
  out << "overlay_dressed = " << (cfg.output.overlay_dressed ? "true" : "false") << "\n";
  return out.str();
}

}  // namespace cavity::io
