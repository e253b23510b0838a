#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include "cavity/broadening.hpp"
#include "cavity/params.hpp"
#include "cavity/spectra.hpp"
#include "cavity/steady_state.hpp"

namespace cavity::io {

enum class Command { sweep, spectrum, dynamics, roots };
const char* to_string(Command c);

struct BinsConfig {
  BinStrategy strategy = BinStrategy::delta;
  std::size_t nodes = 0;  // 0 = default budget
};

struct SweepConfig {
  double c_min_khz = 0, c_max_khz = 0;
  std::size_t c_points = 0;
  double p_min_khz = 0, p_max_khz = 0;
  std::size_t p_points = 0;
};

struct SpectrumConfig {
  double delta_c_khz = 0;
  double p_min_khz = 0, p_max_khz = 0;
  std::size_t p_points = 0;
};

enum class InitialState { ground, saturated };

struct DynamicsConfig {
  double delta_c_khz = 0, delta_p_khz = 0;
  double t_end_s = 0;       // used when settle == false
  bool settle = false;
  double horizon_s = 0;     // used when settle == true
  double criterion = 1e-7;
  InitialState initial = InitialState::ground;
  double rtol = 1e-8;
  double atol = 1e-12;
};

struct RootsConfig {
  double delta_c_khz = 0, delta_p_khz = 0;
};

struct OutputConfig {
  std::string dir = ".";
  std::string prefix;       // defaults to the subcommand name
  std::string format = "csv";  // csv | json | both
  bool image = false;
  bool overlay_dressed = false;
};

/// A fully resolved run: parameters in angular units plus the raw kHz values
/// for exact echo, one command block, bins/solver/output blocks.
struct RunConfig {
  SystemParams params;
  std::map<std::string, double> params_khz;
  BinsConfig bins;
  SolveOptions solve;
  Command command = Command::sweep;
  SweepConfig sweep;
  SpectrumConfig spectrum;
  DynamicsConfig dynamics;
  RootsConfig roots;
  OutputConfig output;
};

/// Parses the key = value / [section] format. Throws ConfigError with
/// file:line diagnostics on malformed input, unknown keys, or when not
/// exactly one command block is present.
RunConfig parse_config_text(const std::string& text, const std::string& origin);
RunConfig parse_config_file(const std::filesystem::path& path);

/// Renders the fully resolved configuration; parsing the result reproduces
/// the run bit-identically.
std::string render_config(const RunConfig& cfg);

}  // namespace cavity::io
