#pragma once

// Kapitza-Dirac pulse operators, pulse trains and the ideal spin-dependent kick.
//
// A single counter-propagating pulse pair of area theta at standing-wave phase
// phi acts as
//     U = sum_n e^{i n phi} J_n(theta) sigma_x^{|n| mod 2} (x) D(i n eta)
//       = exp(i theta sin(eta (a + a^dag) + phi) sigma_x).
// Between pulses the qubit evolves by exp(+(i/2) omega_hf dt sigma_z). Trap
// evolution is neglected inside a train.
//
// Sign branch: `Plus` is the time-domain resonance f_hf + f_aom = n / dt
// (equivalently f_hf = n f_rep - f_aom for an evenly spaced comb). On that
// branch the kick takes |down> to |up> with displacement +i eta.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "sdk/oscillator.hpp"

namespace sdk {

enum class SignBranch { Plus, Minus };

inline double branch_sign(SignBranch s) { return s == SignBranch::Plus ? 1.0 : -1.0; }

struct KickPhysics {
    double eta = 0.22;
    double omega_t = 0.0;  // rad/s
    double omega_hf = 0.0; // rad/s
    // Largest |n| retained in the Bessel sum; 0 picks it from theta.
    int bessel_cutoff = 0;
};

struct PulseEvent {
    double arrival_time = 0.0; // s
    double theta = 0.0;        // rad
    double phase_offset = 0.0; // rad, added to omega_A t + phi_0
};

struct TrainSchedule {
    std::vector<PulseEvent> pulses;
    double omega_A = 0.0; // rad/s
    double phi_0 = 0.0;   // rad
    SignBranch sign = SignBranch::Plus;

    // Throws InvalidSchedule on an empty train, non-positive area or
    // non-increasing arrival times.
    void validate() const;
    double duration() const;
    double total_area() const;
    // Standing-wave phase seen by pulse i.
    double pulse_phase(std::size_t i) const;
};

// m pulses of area total_area / m separated by `spacing`, first pulse at t = 0.
TrainSchedule equally_spaced_train(int m, double spacing, double total_area, double omega_A,
                                   double phi_0 = 0.0, SignBranch sign = SignBranch::Plus);

// Integer-order Bessel function of the first kind, J_{-n}(x) = (-1)^n J_n(x).
double bessel_j(int n, double x);

// Smallest n_max with 2 sum_{n > n_max} J_n(theta)^2 <= tail.
int bessel_cutoff_for(double theta, double tail = 1e-12);

// Tail used when the cutoff is picked automatically. A probability tail of
// 1e-12 still leaves amplitude errors of order 1e-7 in the operator, so the
// automatic choice bounds the neglected amplitudes instead.
inline constexpr double kAdaptiveBesselTail = 1e-32;

// physics.bessel_cutoff when set (BesselCutoffTooSmall if it misses the
// 1e-12 probability tail), otherwise bessel_cutoff_for(theta, kAdaptiveBesselTail).
int kick_bessel_cutoff(double theta, const KickPhysics& physics);

// Operator of the form sum_k S_k (x) D(i k eta) with 2x2 spin coefficients S_k.
// Displacements along the imaginary axis commute, so products of kicks and
// qubit phases stay in this form and can be composed exactly before a single
// truncation to the Fock space.
class MomentumExpansion {
public:
    static MomentumExpansion identity();
    static MomentumExpansion kick(double theta, double phi, int bessel_cutoff);
    static MomentumExpansion spin(const Matrix2& s);
    static MomentumExpansion from_orders(std::map<int, Matrix2> coefficients);

    // this <- lhs * this
    void left_multiply(const MomentumExpansion& lhs);
    void left_multiply_spin(const Matrix2& s);
    // this <- this * s
    void right_multiply_spin(const Matrix2& s);
    // Drops orders whose coefficients are below `threshold` in max norm.
    void prune(double threshold = 1e-17);

    const std::map<int, Matrix2>& coefficients() const noexcept { return coeffs_; }
    int max_order() const;

    DenseOperator to_operator(double eta, const HilbertDims& dims) const;

private:
    std::map<int, Matrix2> coeffs_;
};

DenseOperator kick_pulse_operator(double theta, double phi, const KickPhysics& physics,
                                  const HilbertDims& dims);

MomentumExpansion train_expansion(const TrainSchedule& schedule, const KickPhysics& physics);
DenseOperator train_operator(const TrainSchedule& schedule, const KickPhysics& physics,
                             const HilbertDims& dims);

MomentumExpansion ideal_sdk_expansion(double phi_prime, SignBranch sign);
DenseOperator ideal_sdk_operator(const KickPhysics& physics, double phi_prime, SignBranch sign,
                                 const HilbertDims& dims);

// Reads phi' off a candidate kick from its two spin-flip amplitudes on the
// motional ground state. The remaining freedom is an overall phase.
double fit_sdk_phase(const DenseOperator& candidate, const KickPhysics& physics, SignBranch sign);

struct FidelityReport {
    double fidelity = 0.0;
    std::string reference_states;
    double global_phase = 0.0;
    std::vector<double> per_probe;
};

// |down>, |up>, |+>, |-> on the motional ground state.
std::vector<SpinOscState> cardinal_probes(const HilbertDims& dims);

// Worst case over probes of |<psi| ideal^dag candidate |psi>|^2.
FidelityReport sdk_fidelity(const DenseOperator& candidate, const DenseOperator& ideal,
                            std::span<const SpinOscState> probes);
// Thermal variant: for each spin cardinal state, the weighted average over
// Fock levels of the state fidelity; worst case over the four spin states.
FidelityReport sdk_fidelity(const DenseOperator& candidate, const DenseOperator& ideal,
                            const ThermalEnsemble& ensemble);

struct TrainFidelity {
    FidelityReport report;
    double phi_prime = 0.0;
    double flip_probability = 0.0;
};

// Fits phi', builds the matching ideal kick and scores the train on the
// cardinal probes.
TrainFidelity train_fidelity(const TrainSchedule& schedule, const KickPhysics& physics,
                             const HilbertDims& dims);

//
// Finite-duration validation integrator
//

enum class PulseShape { Square, Gaussian };

struct IntegratorOptions {
    int min_steps = 200;
    double max_step_phase = 0.01; // omega_hf * h
    bool include_trap_term = false;
    double convergence_tol = 1e-6;
    double phase_at_center = kPi / 2.0;
    double omega_A = 0.0;
    // Gaussian pulses are integrated over +-window_fwhm * tau.
    double window_fwhm = 3.0;
};

struct PulseIntegration {
    // Pulse-centred interaction-picture propagator, directly comparable with
    // kick_pulse_operator(theta, phase_at_center).
    DenseOperator propagator;
    // Delta-pulse area giving the same spin-flip probability from |down, 0>.
    // NaN when that probability is beyond the monotone range theta <= pi/2.
    double theta_eff;
    int steps;
    double convergence_error;
};

// tau is the duration of a square pulse or the FWHM of a Gaussian one.
PulseIntegration integrate_pulse_hamiltonian(double theta_nominal, double tau, PulseShape shape,
                                             const KickPhysics& physics, const HilbertDims& dims,
                                             const IntegratorOptions& options = {});

} // namespace sdk
