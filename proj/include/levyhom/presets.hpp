#pragma once

#include "levyhom/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace levyhom {

/// Parameters shared by the named presets. Unset fields take the preset's
/// default.
struct PresetParams {
  std::optional<int> n;
  std::optional<double> gamma_base;
  std::optional<double> gamma_amp;
  std::optional<double> gamma_coupling;
  std::optional<double> sigma;
  std::optional<double> potential_amp;
  std::optional<double> force_amp;
};

struct PresetInfo {
  std::string name;
  std::string description;
};

const std::vector<PresetInfo>& preset_registry();

/// Builds a registered preset. Throws std::invalid_argument for unknown
/// names or parameters that break the eigenvalue floor.
PresetModel make_preset(const std::string& name, const PresetParams& params = {});

}  // namespace levyhom
