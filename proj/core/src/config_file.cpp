#include "flashpim/config_file.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace flashpim {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("ConfigFile: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

ConfigFile ConfigFile::parse(const std::string& text, const std::string& origin) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                         ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                         ": empty section name");
            cfg.sections_[section];
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                     ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": empty key");
        cfg.sections_[section][key] = value;
    }
    return cfg;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

std::optional<std::string> ConfigFile::get(const std::string& section,
                                           const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return std::nullopt;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
    const auto v = get(section, key);
    if (!v) return fallback;
    char* end = nullptr;
    const double d = std::strtod(v->c_str(), &end);
    if (end == v->c_str() || *end != '\0')
        throw std::runtime_error("ConfigFile: bad number for " + section + "." + key);
    return d;
}

int ConfigFile::get_int(const std::string& section, const std::string& key,
                        int fallback) const {
    const double d = get_double(section, key, static_cast<double>(fallback));
    return static_cast<int>(d);
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
    const auto v = get(section, key);
    return v ? *v : fallback;
}

std::vector<int> ConfigFile::get_int_list(const std::string& section, const std::string& key,
                                          const std::vector<int>& fallback) const {
    const auto v = get(section, key);
    if (!v) return fallback;
    std::vector<int> out;
    std::stringstream ss(*v);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        cell = trim(cell);
        if (cell.empty()) continue;
        out.push_back(std::atoi(cell.c_str()));
    }
    if (out.empty())
        throw std::runtime_error("ConfigFile: empty list for " + section + "." + key);
    return out;
}

std::vector<std::string> ConfigFile::sections_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [name, _] : sections_)
        if (name.rfind(prefix, 0) == 0) out.push_back(name);
    return out;
}

TechParams tech_from_config(const ConfigFile& c) {
    TechParams t;
    t.r_bl_per_row = c.get_double("tech", "r_bl_per_row", t.r_bl_per_row);
    t.c_bl_per_row = c.get_double("tech", "c_bl_per_row", t.c_bl_per_row);
    t.r_bls_per_col = c.get_double("tech", "r_bls_per_col", t.r_bls_per_col);
    t.c_bls_per_col = c.get_double("tech", "c_bls_per_col", t.c_bls_per_col);
    t.c_cell_per_col = c.get_double("tech", "c_cell_per_col", t.c_cell_per_col);
    t.c_stair_per_stack = c.get_double("tech", "c_stair_per_stack", t.c_stair_per_stack);
    t.c_string = c.get_double("tech", "c_string", t.c_string);
    t.c_inv = c.get_double("tech", "c_inv", t.c_inv);
    t.r_s = c.get_double("tech", "r_s", t.r_s);
    t.v_pre = c.get_double("tech", "v_pre", t.v_pre);
    t.v_pass = c.get_double("tech", "v_pass", t.v_pass);
    t.v_read = c.get_double("tech", "v_read", t.v_read);
    t.t_sense = c.get_double("tech", "t_sense", t.t_sense);
    t.t_dis = c.get_double("tech", "t_dis", t.t_dis);
    t.t_accum = c.get_double("tech", "t_accum", t.t_accum);
    t.e_sense_per_col = c.get_double("tech", "e_sense_per_col", t.e_sense_per_col);
    t.e_accum_per_col = c.get_double("tech", "e_accum_per_col", t.e_accum_per_col);
    t.e_accum_mux_slope_per_col =
        c.get_double("tech", "e_accum_mux_slope_per_col", t.e_accum_mux_slope_per_col);
    t.horowitz_k = c.get_double("tech", "horowitz_k", t.horowitz_k);
    t.l_cell_per_col = c.get_double("tech", "l_cell_per_col", t.l_cell_per_col);
    t.l_staircase_per_stack =
        c.get_double("tech", "l_staircase_per_stack", t.l_staircase_per_stack);
    t.w_per_row = c.get_double("tech", "w_per_row", t.w_per_row);
    t.alpha_input = c.get_double("tech", "alpha_input", t.alpha_input);
    t.rows_per_block = c.get_int("tech", "rows_per_block", t.rows_per_block);
    t.validate();
    return t;
}

PlaneConfig plane_from_config(const ConfigFile& c, const std::string& section) {
    PlaneConfig p;
    p.n_row = c.get_int(section, "n_row", p.n_row);
    p.n_col = c.get_int(section, "n_col", p.n_col);
    p.n_stack = c.get_int(section, "n_stack", p.n_stack);
    p.bits_per_cell = c.get_int(section, "bits_per_cell", p.bits_per_cell);
    return p;
}

FlashTopology topology_from_config(const ConfigFile& c) {
    FlashTopology t;
    t.n_channel = c.get_int("topology", "n_channel", t.n_channel);
    t.n_way = c.get_int("topology", "n_way", t.n_way);
    t.n_die = c.get_int("topology", "n_die", t.n_die);
    t.n_plane = c.get_int("topology", "n_plane", t.n_plane);
    t.bus_bytes_per_sec = c.get_double("topology", "bus_bytes_per_sec", t.bus_bytes_per_sec);
    const std::string bus = c.get_string("topology", "bus_topology", "htree");
    if (bus == "htree") t.bus_topology = BusTopology::htree;
    else if (bus == "shared") t.bus_topology = BusTopology::shared;
    else throw std::runtime_error("ConfigFile: bus_topology must be htree or shared");
    t.slc_dies_per_way = c.get_int("topology", "slc_dies_per_way", t.slc_dies_per_way);
    t.qlc_dies_per_way = c.get_int("topology", "qlc_dies_per_way", t.qlc_dies_per_way);
    t.rpu_clock_hz = c.get_double("topology", "rpu_clock_hz", t.rpu_clock_hz);
    t.mux_ratio = c.get_int("topology", "mux_ratio", t.mux_ratio);
    t.channel_setup_s = c.get_double("topology", "channel_setup_s", t.channel_setup_s);
    t.partial_bytes = c.get_int("topology", "partial_bytes", t.partial_bytes);
    t.final_bytes = c.get_int("topology", "final_bytes", t.final_bytes);
    t.slc_write_bytes_per_sec =
        c.get_double("topology", "slc_write_bytes_per_sec", t.slc_write_bytes_per_sec);
    t.validate();
    return t;
}

CoreParams cores_from_config(const ConfigFile& c) {
    CoreParams p;
    p.n_cores = c.get_int("cores", "n_cores", p.n_cores);
    p.clock_hz = c.get_double("cores", "clock_hz", p.clock_hz);
    p.ln_cycles_per_elem = c.get_double("cores", "ln_cycles_per_elem", p.ln_cycles_per_elem);
    p.softmax_cycles_per_elem =
        c.get_double("cores", "softmax_cycles_per_elem", p.softmax_cycles_per_elem);
    p.act_cycles_per_elem = c.get_double("cores", "act_cycles_per_elem", p.act_cycles_per_elem);
    p.residual_cycles_per_elem =
        c.get_double("cores", "residual_cycles_per_elem", p.residual_cycles_per_elem);
    p.mac_cycles_per_elem = c.get_double("cores", "mac_cycles_per_elem", p.mac_cycles_per_elem);
    return p;
}

std::vector<LlmModel> models_from_config(const ConfigFile& c) {
    std::vector<LlmModel> out;
    for (const std::string& section : c.sections_with_prefix("model.")) {
        LlmModel m;
        m.name = section.substr(6);
        m.n_blocks = c.get_int(section, "n_blocks", 0);
        m.d_model = c.get_int(section, "d_model", 0);
        m.n_heads = c.get_int(section, "n_heads", 0);
        m.ffn_dim = c.get_int(section, "ffn_dim", 4 * m.d_model);
        m.weight_bits = c.get_int(section, "weight_bits", 8);
        m.act_bits = c.get_int(section, "act_bits", 8);
        m.validate();
        out.push_back(m);
    }
    if (out.empty()) return builtin_model_zoo();
    return out;
}

}  // namespace flashpim
