#pragma once

#include <filesystem>

#include "cavity/spectra.hpp"

namespace cavity::io {

enum class MapChannel { t_norm, f_norm, root_count };
const char* to_string(MapChannel c);

/// Renders one channel of a map as a 24-bit BMP: linear colour scale with
/// min/max side labels, axes in MHz, optional coupled-state resonance
/// overlay. No timestamps; identical maps give identical files.
void render_heatmap(const SpectralMap& map, MapChannel channel, const std::filesystem::path& path,
                    bool overlay_dressed = false);

}  // namespace cavity::io
