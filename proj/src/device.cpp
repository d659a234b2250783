#include "qshuttle/device.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qshuttle::device {

using nlohmann::json;

void DeviceConfig::validate() const {
    auto fail = [](const std::string& key, const std::string& why) {
        throw std::invalid_argument("config key '" + key + "': " + why);
    };
    auto positive = [&](double v, const char* key) {
        if (!(v > 0.0)) fail(key, "must be > 0");
    };
    positive(f_res_l, "f_res_l");
    positive(f_res_center, "f_res_center");
    positive(f_res_m, "f_res_m");
    positive(f_rabi, "f_rabi");
    positive(delta_ez_lc, "delta_ez_lc");
    positive(t_evol_cz, "t_evol_cz");
    if (j_off < 0.0) fail("j_off", "must be >= 0");
    if (!(j_on > j_off)) fail("j_on", "must exceed j_off");
    if (shuttle_duration < 0.0) fail("shuttle_duration", "must be >= 0");
    if (shots_1q < 1 || shots_2q < 1) fail("shots", "must be >= 1");
    if (sequences_1q < 1 || sequences_2q < 1) fail("sequences", "must be >= 1");
    try {
        noise.validate();
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string("config key '") + e.what() + "'");
    }
}

namespace {

double get_num(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number())
        throw std::invalid_argument(std::string("config key '") + key + "': expected a number");
    return j.at(key).get<double>();
}

int get_int(const json& j, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer())
        throw std::invalid_argument(std::string("config key '") + key + "': expected an integer");
    return j.at(key).get<int>();
}

bool get_bool(const json& j, const char* key, bool fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_boolean())
        throw std::invalid_argument(std::string("config key '") + key + "': expected a boolean");
    return j.at(key).get<bool>();
}

std::array<double, 2> get_pair(const json& j, const char* key, std::array<double, 2> fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw std::invalid_argument(std::string("config key '") + key +
                                    "': expected an array of two numbers [Q_L, Q_M]");
    return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

DeviceConfig load_config(const std::string& json_text) {
    json j;
    try {
        j = json_text.empty() ? json::object() : json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config root must be a JSON object");

    DeviceConfig cfg;
    cfg.f_res_l = get_num(j, "f_res_l", cfg.f_res_l);
    cfg.f_res_center = get_num(j, "f_res_center", cfg.f_res_center);
    cfg.f_res_m = get_num(j, "f_res_m", cfg.f_res_m);
    cfg.f_rabi = get_num(j, "f_rabi", cfg.f_rabi);
    cfg.delta_ez_lc = get_num(j, "delta_ez_lc", cfg.delta_ez_lc);
    cfg.j_on = get_num(j, "j_on", cfg.j_on);
    cfg.j_off = get_num(j, "j_off", cfg.j_off);
    cfg.t_evol_cz = get_num(j, "t_evol_cz", cfg.t_evol_cz);
    cfg.phi_uncond_l = get_num(j, "phi_uncond_l", cfg.phi_uncond_l);
    cfg.phi_uncond_m = get_num(j, "phi_uncond_m", cfg.phi_uncond_m);
    cfg.shuttle_phase = get_num(j, "shuttle_phase", cfg.shuttle_phase);
    cfg.shuttle_duration = get_num(j, "shuttle_duration", cfg.shuttle_duration);
    cfg.shots_1q = get_int(j, "shots_1q", cfg.shots_1q);
    cfg.sequences_1q = get_int(j, "sequences_1q", cfg.sequences_1q);
    cfg.shots_2q = get_int(j, "shots_2q", cfg.shots_2q);
    cfg.sequences_2q = get_int(j, "sequences_2q", cfg.sequences_2q);
    cfg.b_ext_tesla = get_num(j, "b_ext_tesla", cfg.b_ext_tesla);
    cfg.tunnel_coupling_r = get_num(j, "tunnel_coupling_r", cfg.tunnel_coupling_r);

    if (j.contains("noise")) {
        const json& n = j.at("noise");
        if (!n.is_object()) throw std::invalid_argument("config key 'noise': expected an object");
        auto& nm = cfg.noise;
        nm.t2_star = get_pair(n, "t2_star", nm.t2_star);
        nm.t2_echo = get_pair(n, "t2_echo", nm.t2_echo);
        nm.echo_exponent = get_pair(n, "echo_exponent", nm.echo_exponent);
        nm.t2_rabi = get_pair(n, "t2_rabi", nm.t2_rabi);
        nm.t2_dcz = get_pair(n, "t2_dcz", nm.t2_dcz);
        nm.shuttle.f_up = get_num(n, "shuttle_f_up", nm.shuttle.f_up);
        nm.shuttle.f_down = get_num(n, "shuttle_f_down", nm.shuttle.f_down);
        nm.shuttle.f_phase = get_num(n, "shuttle_f_phase", nm.shuttle.f_phase);
        const auto eps_up = get_pair(n, "readout_eps_up", {nm.readout[0].eps_up, nm.readout[1].eps_up});
        const auto eps_down =
            get_pair(n, "readout_eps_down", {nm.readout[0].eps_down, nm.readout[1].eps_down});
        for (int q = 0; q < 2; ++q) {
            nm.readout[q].eps_up = eps_up[q];
            nm.readout[q].eps_down = eps_down[q];
        }
        nm.quasistatic_enabled = get_bool(n, "quasistatic_enabled", nm.quasistatic_enabled);
        nm.dcz_dephasing_enabled = get_bool(n, "dcz_dephasing_enabled", nm.dcz_dephasing_enabled);
        nm.echo_decay_enabled = get_bool(n, "echo_decay_enabled", nm.echo_decay_enabled);
        nm.shuttle_noise_enabled = get_bool(n, "shuttle_noise_enabled", nm.shuttle_noise_enabled);
        nm.readout_error_enabled = get_bool(n, "readout_error_enabled", nm.readout_error_enabled);
        if (n.contains("quasistatic_resample")) {
            const std::string mode = n.at("quasistatic_resample").get<std::string>();
            if (mode == "per_shot")
                nm.resample = noise::QuasistaticResample::per_shot;
            else if (mode == "per_sequence")
                nm.resample = noise::QuasistaticResample::per_sequence;
            else
                throw std::invalid_argument(
                    "config key 'quasistatic_resample': expected per_shot or per_sequence");
        }
    }

    cfg.validate();
    return cfg;
}

DeviceConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_config(buf.str());
}

std::string serialize(const DeviceConfig& cfg) {
    json n;
    n["t2_star"] = cfg.noise.t2_star;
    n["t2_echo"] = cfg.noise.t2_echo;
    n["echo_exponent"] = cfg.noise.echo_exponent;
    n["t2_rabi"] = cfg.noise.t2_rabi;
    n["t2_dcz"] = cfg.noise.t2_dcz;
    n["shuttle_f_up"] = cfg.noise.shuttle.f_up;
    n["shuttle_f_down"] = cfg.noise.shuttle.f_down;
    n["shuttle_f_phase"] = cfg.noise.shuttle.f_phase;
    n["readout_eps_up"] = {cfg.noise.readout[0].eps_up, cfg.noise.readout[1].eps_up};
    n["readout_eps_down"] = {cfg.noise.readout[0].eps_down, cfg.noise.readout[1].eps_down};
    n["quasistatic_enabled"] = cfg.noise.quasistatic_enabled;
    n["dcz_dephasing_enabled"] = cfg.noise.dcz_dephasing_enabled;
    n["echo_decay_enabled"] = cfg.noise.echo_decay_enabled;
    n["shuttle_noise_enabled"] = cfg.noise.shuttle_noise_enabled;
    n["readout_error_enabled"] = cfg.noise.readout_error_enabled;
    n["quasistatic_resample"] =
        cfg.noise.resample == noise::QuasistaticResample::per_shot ? "per_shot" : "per_sequence";

    json j;
    j["f_res_l"] = cfg.f_res_l;
    j["f_res_center"] = cfg.f_res_center;
    j["f_res_m"] = cfg.f_res_m;
    j["f_rabi"] = cfg.f_rabi;
    j["delta_ez_lc"] = cfg.delta_ez_lc;
    j["j_on"] = cfg.j_on;
    j["j_off"] = cfg.j_off;
    j["t_evol_cz"] = cfg.t_evol_cz;
    j["phi_uncond_l"] = cfg.phi_uncond_l;
    j["phi_uncond_m"] = cfg.phi_uncond_m;
    j["shuttle_phase"] = cfg.shuttle_phase;
    j["shuttle_duration"] = cfg.shuttle_duration;
    j["shots_1q"] = cfg.shots_1q;
    j["sequences_1q"] = cfg.sequences_1q;
    j["shots_2q"] = cfg.shots_2q;
    j["sequences_2q"] = cfg.sequences_2q;
    j["b_ext_tesla"] = cfg.b_ext_tesla;
    j["tunnel_coupling_r"] = cfg.tunnel_coupling_r;
    j["noise"] = n;
    return j.dump(2) + "\n";
}

std::vector<RegimeWarning> validate_regime(const DeviceConfig& cfg) {
    std::vector<RegimeWarning> warnings;
    if (cfg.j_on / cfg.delta_ez_lc > 0.05)
        warnings.push_back({"j_on", "J/delta_Ez = " + std::to_string(cfg.j_on / cfg.delta_ez_lc) +
                                        " strains the ZZ approximation (threshold 0.05)"});
    const double splitting = std::abs(cfg.f_res_l - cfg.f_res_m);
    if (cfg.f_rabi >= splitting / 10.0)
        warnings.push_back({"f_rabi", "Rabi frequency is within 10x of the resonance splitting; "
                                      "individual addressability is strained"});
    return warnings;
}

}  // namespace qshuttle::device
