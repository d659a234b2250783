#pragma once

#include <string>
#include <vector>

#include "qshuttle/noise.hpp"

namespace qshuttle::device {

enum class OperationState { sparse, coupled };

/// Configuration of the triple-dot two-qubit device. Frequencies in Hz,
/// times in seconds, phases in radians. Defaults are the measured reference
/// profile shipped in configs/reference_device.json.
struct DeviceConfig {
    // EDSR resonances of the left, center and right dot.
    double f_res_l = 16.3366e9;
    double f_res_center = 16.7399e9;
    double f_res_m = 17.0700e9;
    double f_rabi = 2.5e6;
    double delta_ez_lc = 403e6;  // left-center Zeeman difference

    double j_on = 1.25e6;
    double j_off = 0.9e3;
    double t_evol_cz = 0.4e-6;

    double phi_uncond_l = 0.065 * 3.14159265358979323846;
    double phi_uncond_m = 0.040 * 3.14159265358979323846;
    double shuttle_phase = 0.0;      // deterministic coherent phase per transfer
    double shuttle_duration = 3e-9;  // single transfer time

    noise::NoiseModel noise;

    // Protocol defaults.
    int shots_1q = 1000;
    int sequences_1q = 24;
    int shots_2q = 2000;
    int sequences_2q = 50;

    // Documentation-only metadata; not used by the dynamics.
    double b_ext_tesla = 0.45;
    double tunnel_coupling_r = 20.2e9;

    double current_j(OperationState s) const {
        return s == OperationState::coupled ? j_on : j_off;
    }

    void validate() const;  // throws naming the offending key
};

struct RegimeWarning {
    std::string key;
    std::string message;
};

/// Parse a UTF-8 JSON document; missing keys fall back to the reference
/// profile. Throws std::invalid_argument naming the offending key.
DeviceConfig load_config(const std::string& json_text);
DeviceConfig load_config_file(const std::string& path);
std::string serialize(const DeviceConfig& cfg);

/// Soft checks of the ZZ-approximation and addressability regime.
std::vector<RegimeWarning> validate_regime(const DeviceConfig& cfg);

}  // namespace qshuttle::device
