#pragma once

// Simulated experiments: Ramsey interferometry with two spin-dependent kicks,
// fringe-contrast extraction, collapse/revival scans, Kapitza-Dirac
// diffraction statistics and a micromotion phase-modulation model.
//
// Ramsey frame: the qubit is treated in its rotating frame. The detuning
// delta only enters as the axis phase 2 pi delta tau_R of the second pi/2
// pulse. Every kick is taken from one global clock, so its standing-wave phase
// is phi_0 + omega_A t (+ micromotion) in the lab and picks up +-omega_hf t in
// the rotating frame.

#include <optional>
#include <span>
#include <vector>

#include "sdk/pulse.hpp"

namespace sdk {

struct MicromotionParams {
    double mod_depth = 0.0; // rad
    double f_rf = 17.9e6;   // Hz
    double phase = 0.0;     // rad
    // The RF phase is not synchronized with the kicks; results are averaged
    // over this many evenly spaced RF phases starting at `phase`.
    int rf_phase_samples = 16;
};

// mod_depth sin(2 pi f_rf t + phase)
double micromotion_phase_model(double t, const MicromotionParams& params);

enum class KickModel { Ideal, Train, None };

struct ExperimentConfig {
    KickPhysics physics;
    HilbertDims dims{256};
    double n_bar = 0.0;
    double ramsey_separation = 200e-6; // s
    std::vector<double> delta_grid;    // Hz
    KickModel kick_model = KickModel::Ideal;
    // Pulse times relative to the first pulse of each kick (Train model).
    TrainSchedule sdk_schedule;
    double phi_0 = 0.0;   // rad
    double omega_A = 0.0; // rad/s
    SignBranch sign = SignBranch::Plus;
    std::optional<MicromotionParams> micromotion;
    double contrast_scale = 1.0;
    double truncation_budget = kDefaultTruncationBudget;

    // Throws RangeError naming the offending field.
    void validate() const;
};

// Evenly spaced grid from lo to hi inclusive.
std::vector<double> linear_grid(double lo, double hi, int points);

// exp(-i angle/2 (cos(phase) sigma_x + sin(phase) sigma_y)) on the spin.
Matrix2 microwave_rotation_matrix(double angle, double axis_phase);
DenseOperator microwave_rotation(double angle, double axis_phase, const HilbertDims& dims);

// Kick fired at lab time t, expressed in the qubit rotating frame.
MomentumExpansion sdk_in_rotating_frame(const ExperimentConfig& config, double t,
                                        double rf_phase);

enum class RamseyMethod {
    // Composes both kicks and the free evolution into displacements acting
    // on the thermal Fock ensemble; no dense products.
    Fast,
    // Dense operators applied to each Fock state of the ensemble.
    DenseEnsemble,
    // Dense operators acting on the thermal density matrix.
    DensityMatrix,
};

// Reduced spin state just before the second pi/2 pulse, thermally averaged and
// averaged over the RF phase.
Matrix2 ramsey_spin_state(const ExperimentConfig& config, double kick_delay,
                          RamseyMethod method = RamseyMethod::Fast);

// P(up) after the full sequence, thermally averaged.
double ramsey_sequence(const ExperimentConfig& config, double kick_delay, double delta,
                       RamseyMethod method = RamseyMethod::Fast);

// Same sequence for the single initial state |down, n>.
double ramsey_sequence_fock(const ExperimentConfig& config, double kick_delay, double delta,
                            int fock_level);

struct FringePoint {
    double delta = 0.0; // Hz
    double p_up = 0.0;
};

std::vector<FringePoint> ramsey_scan(const ExperimentConfig& config, double kick_delay,
                                     RamseyMethod method = RamseyMethod::Fast);

// Least-squares fit of p = (1 + C cos(2 pi delta tau_R + phi)) / 2.
double fringe_contrast(std::span<const FringePoint> points, double ramsey_separation);

struct ContrastPoint {
    double kick_delay = 0.0; // s
    double contrast = 0.0;
};

struct ContrastCurve {
    std::vector<ContrastPoint> points;
};

// The T grid is split into contiguous blocks across `threads` workers; the
// result does not depend on the thread count.
ContrastCurve contrast_vs_delay(const ExperimentConfig& config, std::span<const double> delays,
                                int threads = 1);

// exp[-4 eta^2 (2 n_bar + 1)(1 - cos omega_t T)] for ideal kicks.
double analytic_contrast(double kick_delay, const KickPhysics& physics, double n_bar);

struct DiffractionOrder {
    int n = 0;
    double bessel = 0.0;     // J_n(theta)^2
    double fourier = 0.0;    // population of order n from the phase-Fourier analysis
    double projection = 0.0; // |<s_n, i n eta| U(phi = 0) |down, 0>|^2
    double unflipped = 0.0;  // population of order n left in the initial spin state
};

struct DiffractionTable {
    double theta = 0.0;
    std::vector<DiffractionOrder> orders;
    double bessel_total = 0.0;
    double bessel_odd = 0.0;
    // Spin-flip probability averaged over the standing-wave phase.
    double flip_probability = 0.0;
    // Spin-flip probability at standing-wave phase 0.
    double flip_probability_phase0 = 0.0;
    double max_odd_unflipped = 0.0;
};

// Single pulse on |down, 0>. Orders are separated by sampling the kick at
// evenly spaced standing-wave phases: sum_j e^{-i n phi_j} U(phi_j) / K keeps
// exactly the n-th Bessel term.
DiffractionTable kapitza_dirac_populations(double theta, const KickPhysics& physics,
                                           const HilbertDims& dims, int phase_samples = 64);

// 2 k sqrt(hbar / (2 m omega_t)) for counter-propagating beams.
double lamb_dicke_parameter(double wavelength_m, double mass_u, double f_trap_hz);

} // namespace sdk
