#ifndef MECSIM_CONFIG_HPP_
#define MECSIM_CONFIG_HPP_

#include <string>

#include "mecsim/model.hpp"
#include "mecsim/traces.hpp"

namespace mecsim {

// Full experiment configuration: simulation parameters plus the synthetic
// world generator settings.
struct AppConfig {
  SimConfig sim;
  WorldGenParams world;
};

// Flat `key = value` text grouped in [sim] / [channel] / [policy] / [world]
// sections. '#' and ';' start comments. Unknown keys are configuration
// errors; omitted keys keep their defaults. parse -> serialize -> parse is
// the identity.
AppConfig parse_config(const std::string& text);
AppConfig load_config_file(const std::string& path);
std::string serialize_config(const AppConfig& config);

}  // namespace mecsim

#endif  // MECSIM_CONFIG_HPP_
