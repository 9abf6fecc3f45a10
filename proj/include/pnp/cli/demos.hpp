#pragma once

#include <string>
#include <vector>

#include "pnp/cli/config.hpp"

namespace pnp::cli {

/// superres2x, superres4x, cs20, deblur, fusion3d.
std::vector<std::string> demo_names();

/// Packaged configuration; throws ArgumentError for unknown names.
ExperimentConfig demo_config(const std::string &name);

} // namespace pnp::cli
