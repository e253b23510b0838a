#pragma once

#include <filesystem>
#include <string>

#include "cavity/config.hpp"
#include "cavity/dynamics.hpp"
#include "cavity/spectra.hpp"
#include "cavity/steady_state.hpp"

#include <json.hpp>

namespace cavity::io {

/// Full-precision double formatting (17 significant digits).
std::string format_full(double v);

/// Writes via a temp file + rename so readers never see a truncated result.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

/// Git-style blob hash of a byte string: sha1("blob <len>\0" + content).
std::string git_blob_sha1(const std::string& content);

std::string csv_from_map(const SpectralMap& map);
std::string csv_from_trajectory(const Trajectory& traj);
std::string csv_from_roots(const SteadyStateResult& result, const Detuning& det);

nlohmann::json json_from_map(const SpectralMap& map);
nlohmann::json json_from_trajectory(const Trajectory& traj);
nlohmann::json json_from_roots(const SteadyStateResult& result, const Detuning& det);

}  // namespace cavity::io
