#pragma once

// Flat run configuration for the command-line tool.
//
// Every key is optional and falls back to the built-in "paper-2013" values.
// Frequencies are given in Hz and converted to angular units exactly once,
// when an ExperimentConfig / KickPhysics is derived.

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "sdk/experiments.hpp"
#include "sdk/resonance.hpp"

namespace sdk {

struct RunConfig {
    double f_trap_hz = 743e3;
    double f_hf_hz = 12.642815e9;
    double f_aom_hz = 489e6;
    double f_rep_hz = 118.306e6;
    double f_rf_hz = 17.9e6;
    double eta = 0.22;
    double n_bar = 10.1;
    int fock_cutoff = 256;
    int guard_margin = 16;
    double truncation_budget = kDefaultTruncationBudget;

    double ramsey_separation_s = 200e-6;
    double delta_max_hz = 3500.0;
    int delta_points = 29;
    KickModel kick_model = KickModel::Ideal;
    double phi0_rad = 0.0;
    SignBranch sign = SignBranch::Plus;
    double mod_depth_rad = 0.0;
    double rf_phase_rad = 0.0;
    int rf_phase_samples = 16;
    double contrast_scale = 1.0;
    // Negative means one trap period.
    double ramsey_delay_s = -1.0;
    int revival_periods = 2;
    int revival_points_per_period = 50;

    std::array<Rational, 3> train_orders{Rational(11, 2), Rational(10), Rational(20)};
    double train_total_area_rad = kPi;
    std::vector<int> fidelity_pulse_counts{2, 4, 8, 16, 32};
    Rational equal_spacing_order{5};
    std::vector<double> diffraction_thetas_rad{0.1, kPi / 8.0, kPi / 2.0};
    int bessel_cutoff = 0;
    // Optional explicit pulse train (relative arrival times) replacing the
    // delay-line plan.
    std::vector<double> custom_pulse_times_s;
    std::vector<double> custom_phase_offsets_rad;

    // Throws RangeError naming the key.
    void validate() const;

    CombSpec comb() const;
    KickPhysics physics() const;
    HilbertDims dims() const;
    double trap_period() const { return 1.0 / f_trap_hz; }
    double kick_delay() const { return ramsey_delay_s < 0.0 ? trap_period() : ramsey_delay_s; }
    std::vector<double> delta_grid() const;
    // Delay-line plan or the custom train, areas summing to train_total_area_rad.
    TrainSchedule sdk_train() const;
    ExperimentConfig experiment() const;

    // All keys with resolved values, sorted, no whitespace.
    std::string canonical_json() const;
    // SHA-256 of canonical_json(), lowercase hex.
    std::string digest() const;
};

// Names accepted by --preset.
std::vector<std::string> preset_names();
RunConfig preset(std::string_view name);

// Parses a flat JSON object. Unknown keys and wrong types raise SchemaError,
// out-of-range values RangeError; the key is reported in both cases.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::string& path);

std::string sha256_hex(std::string_view data);

} // namespace sdk
