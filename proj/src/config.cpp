#include "sdk/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <openssl/evp.h>

#include "json.hpp"
#include "sdk/errors.hpp"

namespace sdk {

using nlohmann::json;

namespace {

void range(bool ok, const char* key, const std::string& msg)
{
    if (!ok) throw Error(ErrorKind::RangeError, msg, key);
}

[[noreturn]] void schema(const std::string& key, const std::string& msg)
{
    throw Error(ErrorKind::SchemaError, msg, key);
}

double as_double(const json& v, const std::string& key)
{
    if (!v.is_number()) schema(key, "expected a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& key)
{
    if (!v.is_number_integer()) schema(key, "expected an integer");
    const auto x = v.get<long long>();
    if (x < -(1LL << 31) || x >= (1LL << 31)) throw Error(ErrorKind::RangeError, "integer out of range", key);
    return static_cast<int>(x);
}

std::string as_string(const json& v, const std::string& key)
{
    if (!v.is_string()) schema(key, "expected a string");
    return v.get<std::string>();
}

Rational as_rational(const json& v, const std::string& key)
{
    try {
        if (v.is_string()) return Rational::parse(v.get<std::string>());
        if (v.is_number()) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.12g", v.get<double>());
            return Rational::parse(buf);
        }
    } catch (const Error& e) {
        throw Error(ErrorKind::RangeError, e.what(), key);
    }
    schema(key, "expected a number or a string such as \"11/2\"");
}

template <class T, class F>
std::vector<T> as_list(const json& v, const std::string& key, F convert)
{
    if (!v.is_array()) schema(key, "expected an array");
    std::vector<T> out;
    for (const auto& x : v) out.push_back(convert(x, key));
    return out;
}

const char* model_name(KickModel m)
{
    switch (m) {
    case KickModel::Ideal: return "ideal";
    case KickModel::Train: return "train";
    case KickModel::None: return "none";
    }
    return "ideal";
}

KickModel parse_model(const std::string& s, const std::string& key)
{
    if (s == "ideal") return KickModel::Ideal;
    if (s == "train") return KickModel::Train;
    if (s == "none") return KickModel::None;
    throw Error(ErrorKind::SchemaError, "kick_model must be ideal, train or none", key);
}

SignBranch parse_sign(const std::string& s, const std::string& key)
{
    if (s == "plus") return SignBranch::Plus;
    if (s == "minus") return SignBranch::Minus;
    throw Error(ErrorKind::SchemaError, "sign must be plus or minus", key);
}

using Setter = std::function<void(RunConfig&, const json&, const std::string&)>;

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto num = [&t](const char* key, double RunConfig::*field) {
            t[key] = [field](RunConfig& c, const json& v, const std::string& k) {
                c.*field = as_double(v, k);
            };
        };
        auto integer = [&t](const char* key, int RunConfig::*field) {
            t[key] = [field](RunConfig& c, const json& v, const std::string& k) {
                c.*field = as_int(v, k);
            };
        };
        num("f_trap_hz", &RunConfig::f_trap_hz);
        num("f_hf_hz", &RunConfig::f_hf_hz);
        num("f_aom_hz", &RunConfig::f_aom_hz);
        num("f_rep_hz", &RunConfig::f_rep_hz);
        num("f_rf_hz", &RunConfig::f_rf_hz);
        num("eta", &RunConfig::eta);
        num("n_bar", &RunConfig::n_bar);
        integer("fock_cutoff", &RunConfig::fock_cutoff);
        integer("guard_margin", &RunConfig::guard_margin);
        num("truncation_budget", &RunConfig::truncation_budget);
        num("ramsey_separation_s", &RunConfig::ramsey_separation_s);
        num("delta_max_hz", &RunConfig::delta_max_hz);
        integer("delta_points", &RunConfig::delta_points);
        num("phi0_rad", &RunConfig::phi0_rad);
        num("mod_depth_rad", &RunConfig::mod_depth_rad);
        num("rf_phase_rad", &RunConfig::rf_phase_rad);
        integer("rf_phase_samples", &RunConfig::rf_phase_samples);
        num("contrast_scale", &RunConfig::contrast_scale);
        num("ramsey_delay_s", &RunConfig::ramsey_delay_s);
        integer("revival_periods", &RunConfig::revival_periods);
        integer("revival_points_per_period", &RunConfig::revival_points_per_period);
        num("train_total_area_rad", &RunConfig::train_total_area_rad);
        integer("bessel_cutoff", &RunConfig::bessel_cutoff);
        t["kick_model"] = [](RunConfig& c, const json& v, const std::string& k) {
            c.kick_model = parse_model(as_string(v, k), k);
        };
        t["sign"] = [](RunConfig& c, const json& v, const std::string& k) {
            c.sign = parse_sign(as_string(v, k), k);
        };
        t["train_orders"] = [](RunConfig& c, const json& v, const std::string& k) {
            const auto list = as_list<Rational>(v, k, as_rational);
            if (list.size() != 3) throw Error(ErrorKind::RangeError, "need exactly 3 orders", k);
            std::copy(list.begin(), list.end(), c.train_orders.begin());
        };
        t["equal_spacing_order"] = [](RunConfig& c, const json& v, const std::string& k) {
            c.equal_spacing_order = as_rational(v, k);
        };
        t["fidelity_pulse_counts"] = [](RunConfig& c, const json& v, const std::string& k) {
            c.fidelity_pulse_counts = as_list<int>(v, k, as_int);
        };
        t["diffraction_thetas_rad"] = [](RunConfig& c, const json& v, const std::string& k) {
            c.diffraction_thetas_rad = as_list<double>(v, k, as_double);
        };
        t["custom_pulse_times_s"] = [](RunConfig& c, const json& v, const std::string& k) {
            c.custom_pulse_times_s = as_list<double>(v, k, as_double);
        };
        t["custom_phase_offsets_rad"] = [](RunConfig& c, const json& v, const std::string& k) {
            c.custom_phase_offsets_rad = as_list<double>(v, k, as_double);
        };
        return t;
    }();
    return table;
}

} // namespace

void RunConfig::validate() const
{
    range(f_trap_hz > 0.0, "f_trap_hz", "must be positive");
    range(f_hf_hz > 0.0, "f_hf_hz", "must be positive");
    range(f_aom_hz > 0.0, "f_aom_hz", "must be positive");
    range(f_rep_hz > 0.0, "f_rep_hz", "must be positive");
    range(f_rf_hz > 0.0, "f_rf_hz", "must be positive");
    range(eta > 0.0 && eta < 10.0, "eta", "must lie in (0, 10)");
    range(n_bar >= 0.0 && std::isfinite(n_bar), "n_bar", "must be >= 0");
    range(fock_cutoff >= 4 && fock_cutoff <= 4096, "fock_cutoff", "must lie in [4, 4096]");
    range(guard_margin >= 0 && guard_margin < fock_cutoff, "guard_margin",
          "must lie in [0, fock_cutoff)");
    range(truncation_budget > 0.0 && truncation_budget < 1.0, "truncation_budget",
          "must lie in (0, 1)");
    range(ramsey_separation_s > 0.0, "ramsey_separation_s", "must be positive");
    range(delta_max_hz > 0.0, "delta_max_hz", "must be positive");
    range(delta_points >= 8, "delta_points", "need at least 8 detunings");
    range(std::isfinite(phi0_rad), "phi0_rad", "must be finite");
    range(mod_depth_rad >= 0.0 && std::isfinite(mod_depth_rad), "mod_depth_rad", "must be >= 0");
    range(std::isfinite(rf_phase_rad), "rf_phase_rad", "must be finite");
    range(rf_phase_samples >= 1, "rf_phase_samples", "must be >= 1");
    range(contrast_scale > 0.0 && contrast_scale <= 1.0, "contrast_scale", "must lie in (0, 1]");
    range(ramsey_delay_s < 0.0 || ramsey_delay_s <= ramsey_separation_s, "ramsey_delay_s",
          "must not exceed ramsey_separation_s");
    range(revival_periods >= 1, "revival_periods", "must be >= 1");
    range(revival_points_per_period >= 1, "revival_points_per_period", "must be >= 1");
    range(train_total_area_rad > 0.0, "train_total_area_rad", "must be positive");
    range(bessel_cutoff >= 0, "bessel_cutoff", "must be >= 0 (0 = automatic)");
    range(equal_spacing_order.num > 0, "equal_spacing_order", "must be positive");
    range(!fidelity_pulse_counts.empty(), "fidelity_pulse_counts", "must not be empty");
    for (int m : fidelity_pulse_counts) range(m >= 1, "fidelity_pulse_counts", "counts must be >= 1");
    for (double th : diffraction_thetas_rad) {
        range(th > 0.0 && th <= kPi, "diffraction_thetas_rad", "angles must lie in (0, pi]");
    }
    range(custom_phase_offsets_rad.empty() ||
              custom_phase_offsets_rad.size() == custom_pulse_times_s.size(),
          "custom_phase_offsets_rad", "must match custom_pulse_times_s in length");
    for (std::size_t i = 1; i < custom_pulse_times_s.size(); ++i) {
        range(custom_pulse_times_s[i] > custom_pulse_times_s[i - 1], "custom_pulse_times_s",
              "arrival times must be strictly increasing");
    }
}

CombSpec RunConfig::comb() const { return {f_rep_hz, f_aom_hz, f_hf_hz}; }

KickPhysics RunConfig::physics() const
{
    KickPhysics p;
    p.eta = eta;
    p.omega_t = kTwoPi * f_trap_hz;
    p.omega_hf = kTwoPi * f_hf_hz;
    p.bessel_cutoff = bessel_cutoff;
    return p;
}

HilbertDims RunConfig::dims() const { return HilbertDims(fock_cutoff, guard_margin); }

std::vector<double> RunConfig::delta_grid() const
{
    return linear_grid(-delta_max_hz, delta_max_hz, delta_points);
}

TrainSchedule RunConfig::sdk_train() const
{
    if (custom_pulse_times_s.empty()) {
        const DelayPlan plan = plan_eight_pulse_train(train_orders, comb(), sign);
        return schedule_from_plan(plan, comb(), train_total_area_rad, phi0_rad);
    }
    TrainSchedule s;
    s.omega_A = kTwoPi * f_aom_hz;
    s.phi_0 = phi0_rad;
    s.sign = sign;
    const double theta = train_total_area_rad / static_cast<double>(custom_pulse_times_s.size());
    for (std::size_t i = 0; i < custom_pulse_times_s.size(); ++i) {
        const double off = custom_phase_offsets_rad.empty() ? 0.0 : custom_phase_offsets_rad[i];
        s.pulses.push_back({custom_pulse_times_s[i], theta, off});
    }
    return s;
}

ExperimentConfig RunConfig::experiment() const
{
    validate();
    ExperimentConfig e;
    e.physics = physics();
    e.dims = dims();
    e.n_bar = n_bar;
    e.ramsey_separation = ramsey_separation_s;
    e.delta_grid = delta_grid();
    e.kick_model = kick_model;
    if (kick_model == KickModel::Train) e.sdk_schedule = sdk_train();
    e.phi_0 = phi0_rad;
    e.omega_A = kTwoPi * f_aom_hz;
    e.sign = sign;
    e.micromotion = MicromotionParams{mod_depth_rad, f_rf_hz, rf_phase_rad, rf_phase_samples};
    e.contrast_scale = contrast_scale;
    e.truncation_budget = truncation_budget;
    return e;
}

std::string RunConfig::canonical_json() const
{
    json j;
    j["f_trap_hz"] = f_trap_hz;
    j["f_hf_hz"] = f_hf_hz;
    j["f_aom_hz"] = f_aom_hz;
    j["f_rep_hz"] = f_rep_hz;
    j["f_rf_hz"] = f_rf_hz;
    j["eta"] = eta;
    j["n_bar"] = n_bar;
    j["fock_cutoff"] = fock_cutoff;
    j["guard_margin"] = guard_margin;
    j["truncation_budget"] = truncation_budget;
    j["ramsey_separation_s"] = ramsey_separation_s;
    j["delta_max_hz"] = delta_max_hz;
    j["delta_points"] = delta_points;
    j["kick_model"] = model_name(kick_model);
    j["phi0_rad"] = phi0_rad;
    j["sign"] = sign == SignBranch::Plus ? "plus" : "minus";
    j["mod_depth_rad"] = mod_depth_rad;
    j["rf_phase_rad"] = rf_phase_rad;
    j["rf_phase_samples"] = rf_phase_samples;
    j["contrast_scale"] = contrast_scale;
    j["ramsey_delay_s"] = kick_delay();
    j["revival_periods"] = revival_periods;
    j["revival_points_per_period"] = revival_points_per_period;
    j["train_orders"] = {train_orders[0].str(), train_orders[1].str(), train_orders[2].str()};
    j["train_total_area_rad"] = train_total_area_rad;
    j["fidelity_pulse_counts"] = fidelity_pulse_counts;
    j["equal_spacing_order"] = equal_spacing_order.str();
    j["diffraction_thetas_rad"] = diffraction_thetas_rad;
    j["bessel_cutoff"] = bessel_cutoff;
    j["custom_pulse_times_s"] = custom_pulse_times_s;
    j["custom_phase_offsets_rad"] = custom_phase_offsets_rad;
    return j.dump();
}

std::string RunConfig::digest() const { return sha256_hex(canonical_json()); }

std::vector<std::string> preset_names() { return {"paper-2013"}; }

RunConfig preset(std::string_view name)
{
    if (name == "paper-2013") return RunConfig{};
    throw Error(ErrorKind::SchemaError, "unknown preset '" + std::string(name) + "'", "preset");
}

RunConfig parse_config(std::string_view json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::SchemaError, std::string("invalid JSON: ") + e.what(), "");
    }
    if (!j.is_object()) throw Error(ErrorKind::SchemaError, "config must be a JSON object", "");
    RunConfig c;
    const auto& table = setters();
    for (const auto& [key, value] : j.items()) {
        auto it = table.find(key);
        if (it == table.end()) schema(key, "unknown key");
        it->second(c, value, key);
    }
    c.validate();
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open config file " + path, "config");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string sha256_hex(std::string_view data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorKind::IoError, "SHA-256 failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

} // namespace sdk
