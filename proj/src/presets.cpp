#include <string>
#include <vector>

#include "hetmem/platform.hpp"
#include "presets_data.hpp"

namespace hetmem {

std::string_view preset_json(std::string_view name) {
  if (name == "zcu102") return detail::kPresetZcu102;
  if (name == "jetson") return detail::kPresetJetson;
  raise(ErrorCode::ConfigError, "unknown preset '" + std::string(name) +
                                    "' (available: zcu102, jetson)");
}

std::vector<std::string> preset_names() { return {"zcu102", "jetson"}; }

}  // namespace hetmem
