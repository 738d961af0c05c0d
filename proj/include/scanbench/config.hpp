#pragma once

// Plain-text workload config: one `key = value` per line, `#` comments.
// Unknown keys are rejected.

#include <string>

#include "scanbench/sim.hpp"

namespace scanbench {

RunConfig default_run_config();

// Apply one key/value pair; throws std::invalid_argument on unknown keys or
// unparsable values.
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text, RunConfig base);

}  // namespace scanbench
