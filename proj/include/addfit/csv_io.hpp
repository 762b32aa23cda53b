#pragma once

#include <string>

#include "addfit/panel.hpp"

namespace addfit {

/// Format a double with 17 significant digits (round-trips exactly).
std::string format_full(double v);

/// Load a panel from a CSV file with header x1,..,xJ,y1,..,yJ.
/// Throws CsvError with the offending line number on malformed input.
PanelData load_panel_csv(const std::string& path);

/// Write a panel in the same format (full precision).
void write_panel_csv(const std::string& path, const PanelData& panel);

}  // namespace addfit
