#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flashpim/interconnect.hpp"
#include "flashpim/llm_workload.hpp"
#include "flashpim/tech_model.hpp"

namespace flashpim {

/// INI-style configuration: `[section]` headers, `key = value` pairs,
/// `#`/`;` comments. Dotted section names nest ([model.opt-30b]).
/// Schema is documented in configs/default.ini.
class ConfigFile {
  public:
    static ConfigFile load(const std::string& path);
    static ConfigFile parse(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& section, const std::string& key) const;
    std::optional<std::string> get(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    std::vector<int> get_int_list(const std::string& section, const std::string& key,
                                  const std::vector<int>& fallback) const;

    std::vector<std::string> sections_with_prefix(const std::string& prefix) const;

  private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

// Struct builders: every field is optional and falls back to the
// calibrated defaults.
TechParams tech_from_config(const ConfigFile& c);
PlaneConfig plane_from_config(const ConfigFile& c, const std::string& section = "plane");
FlashTopology topology_from_config(const ConfigFile& c);
CoreParams cores_from_config(const ConfigFile& c);
std::vector<LlmModel> models_from_config(const ConfigFile& c);

}  // namespace flashpim
