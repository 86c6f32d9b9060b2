#pragma once

#include "forceflow/interpolator.hpp"
#include "forceflow/types.hpp"

#include <filesystem>
#include <string>

namespace forceflow::svg {

// Scatter plot; points coloured by integer category (labels or sink ids).
void scatter(const std::filesystem::path& path, const Points2& points, const Labels& categories,
             const std::string& title);

// Arrow per grid cell, arrow length normalised to the cell size, colour by
// magnitude (viridis-like ramp).
void quiver(const std::filesystem::path& path, const FieldGrid& grid, const std::string& title);

}  // namespace forceflow::svg
