#pragma once

// Comb resonance arithmetic and the eight-pulse delay-line planner.
//
// Orders are exact rationals so the half-cycle bookkeeping on the first delay
// never goes through floating point; they become times only in
// delay_from_order.

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "sdk/pulse.hpp"

namespace sdk {

struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n, long long d = 1);

    // Accepts "11/2", "5.5", "10".
    static Rational parse(std::string_view text);

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool is_integer() const { return den == 1; }
    bool is_half_integer() const { return den == 2; }
    std::string str() const;

    friend Rational operator+(Rational a, Rational b);
    friend bool operator==(const Rational&, const Rational&) = default;
    friend bool operator<(const Rational& a, const Rational& b);
};

struct CombSpec {
    double f_rep = 0.0; // Hz
    double f_aom = 0.0; // Hz
    double f_hf = 0.0;  // Hz

    // InvalidComb for non-positive frequencies or f_hf at an integer or
    // half-integer multiple of f_rep (relative tolerance 1e-9).
    void validate() const;
};

struct ResonanceSolution {
    long long n = 0;
    SignBranch sign = SignBranch::Plus;
    // f_hf - (n f_rep - f_aom) on Plus, f_hf - (n f_rep + f_aom) on Minus.
    double residual = 0.0; // Hz
};

ResonanceSolution comb_resonance(const CombSpec& spec);

// Beat frequency f_hf + f_aom (Plus) or f_hf - f_aom (Minus) that sets the
// pulse spacing in the time domain.
double resonance_frequency(const CombSpec& spec, SignBranch sign);

// T = n / (f_hf +- f_aom).
double delay_from_order(Rational n, const CombSpec& spec, SignBranch sign);

struct DelayPlan {
    std::array<Rational, 3> orders;
    std::array<double, 3> delays{}; // s
    std::vector<double> pulse_times;   // 8 arrival times, s
    std::vector<double> phase_offsets; // 0 or pi
    // Subset of {T1, T2, T3} each pulse went through, bit k for T_{k+1}.
    std::vector<int> arms;
    SignBranch sign = SignBranch::Plus;

    double duration() const { return delays[0] + delays[1] + delays[2]; }
    double mean_spacing() const { return duration() / 7.0; }
    double effective_rate() const { return 1.0 / mean_spacing(); }
};

// Pulses whose path includes the T1 delay get a pi phase offset, which
// compensates the half cycle of the half-integer first order.
DelayPlan plan_eight_pulse_train(const std::array<Rational, 3>& orders, const CombSpec& spec,
                                 SignBranch sign = SignBranch::Plus);

// Equal areas total_area / 8; standing-wave phase omega_A = 2 pi f_aom.
TrainSchedule schedule_from_plan(const DelayPlan& plan, const CombSpec& spec, double total_area,
                                 double phi_0 = 0.0);

struct GapReport {
    double dt = 0.0;       // s
    double cycles = 0.0;   // accumulated cycles including the phase offset step
    double distance = 0.0; // to the nearest integer
    bool pass = false;
};

struct ScheduleValidation {
    std::vector<GapReport> gaps;
    double tolerance = 0.0;
    double max_distance = 0.0;
    bool pass = false;
};

// Report only: bad schedules are described, not rejected.
ScheduleValidation validate_schedule(const TrainSchedule& schedule, const CombSpec& spec,
                                     double tolerance = 1e-3);

} // namespace sdk
