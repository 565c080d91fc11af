#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sdk/errors.hpp"
#include "sdk/experiments.hpp"
#include "sdk/resonance.hpp"

using namespace sdk;

namespace {

const double kFtrap = 743e3;
const double kPeriod = 1.0 / kFtrap;

ExperimentConfig base_config(double n_bar, int fock = 256, int margin = -1)
{
    ExperimentConfig c;
    c.physics.eta = 0.22;
    c.physics.omega_t = kTwoPi * kFtrap;
    c.physics.omega_hf = kTwoPi * 12.642815e9;
    c.dims = HilbertDims(fock, margin);
    c.n_bar = n_bar;
    c.delta_grid = linear_grid(-3500.0, 3500.0, 29);
    c.omega_A = kTwoPi * 489e6;
    return c;
}

double contrast_at(const ExperimentConfig& c, double t, RamseyMethod m = RamseyMethod::Fast)
{
    const auto pts = ramsey_scan(c, t, m);
    return fringe_contrast(pts, c.ramsey_separation);
}

std::vector<FringePoint> synthetic(double contrast, double phase)
{
    std::vector<FringePoint> pts;
    for (double d : linear_grid(-3500.0, 3500.0, 29)) {
        pts.push_back({d, 0.5 * (1.0 + contrast * std::cos(kTwoPi * d * 200e-6 + phase))});
    }
    return pts;
}

} // namespace

TEST(Microwave, RotationExamples)
{
    const HilbertDims dims(4);
    EXPECT_LT(microwave_rotation(0.0, 0.3, dims).max_abs_diff(DenseOperator::identity(dims)), 1e-15);
    const auto down = SpinOscState::basis(dims, Spin::Down, 0);
    const DenseOperator r = microwave_rotation(kPi / 2, 0.0, dims);
    EXPECT_NEAR((r * r).apply(down).spin_population(Spin::Up), 1.0, 1e-15);
    const DenseOperator echo = microwave_rotation(kPi / 2, kPi, dims) * r;
    EXPECT_NEAR(echo.apply(down).spin_population(Spin::Up), 0.0, 1e-15);
    const Matrix2 m = microwave_rotation_matrix(1.1, 0.4);
    EXPECT_LT((m.adjoint() * m - Matrix2::Identity()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Ramsey, NoKicksGivesFullTransfer)
{
    ExperimentConfig c = base_config(10.1);
    c.kick_model = KickModel::None;
    EXPECT_NEAR(ramsey_sequence(c, kPeriod, 0.0), 1.0, 1e-12);
}

TEST(Ramsey, RotatingFrameMatchesLabFrame)
{
    // Short separation, no kicks: lab-frame qubit precession at omega_hf and a
    // drive at omega_hf + 2 pi delta whose phase runs continuously.
    ExperimentConfig c = base_config(0.0, 16);
    c.kick_model = KickModel::None;
    c.ramsey_separation = 1e-6;
    for (double delta : {-4.1e5, -1e5, 0.0, 2.5e5, 7e5}) {
        const double w_mw = c.physics.omega_hf + kTwoPi * delta;
        const double tau = c.ramsey_separation;
        const Matrix2 u = microwave_rotation_matrix(kPi / 2, -w_mw * tau) *
                          qubit_phase_matrix(c.physics.omega_hf, tau) *
                          microwave_rotation_matrix(kPi / 2, 0.0);
        const double p_lab = std::norm(u(1, 0));
        EXPECT_NEAR(ramsey_sequence(c, 0.0, delta), p_lab, 1e-8) << delta;
    }
}

TEST(Ramsey, FullPeriodRevives)
{
    const ExperimentConfig c = base_config(0.0);
    EXPECT_GE(contrast_at(c, kPeriod), 1.0 - 1e-6);
    // The two kicks leave a spin phase that shifts the fringe but keeps it pure.
    const Matrix2 rho = ramsey_spin_state(c, kPeriod);
    EXPECT_NEAR(2.0 * std::abs(rho(0, 1)), 1.0, 1e-6);
}

TEST(Ramsey, HalfPeriodCollapses)
{
    const ExperimentConfig c = base_config(10.1);
    const double analytic = analytic_contrast(0.5 * kPeriod, c.physics, 10.1);
    EXPECT_NEAR(analytic, std::exp(-8 * 0.22 * 0.22 * 21.2), 1e-15);
    EXPECT_LT(analytic, 5e-4);
    for (double d : {-3500.0, 0.0, 1250.0}) {
        EXPECT_NEAR(ramsey_sequence(c, 0.5 * kPeriod, d), 0.5, 1e-3);
    }
    EXPECT_LE(contrast_at(c, 0.5 * kPeriod), 1e-3);
}

TEST(Fringe, SyntheticExamples)
{
    EXPECT_NEAR(fringe_contrast(synthetic(1.0, 0.0), 200e-6), 1.0, 1e-9);
    EXPECT_NEAR(fringe_contrast(synthetic(0.0, 0.0), 200e-6), 0.0, 1e-9);
    EXPECT_NEAR(fringe_contrast(synthetic(0.8, kPi / 3), 200e-6), 0.8, 1e-9);
}

TEST(Fringe, DegenerateInputs)
{
    auto expect_degenerate = [](std::vector<FringePoint> pts, double tau) {
        try {
            fringe_contrast(pts, tau);
            ADD_FAILURE();
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::FitDegenerate);
        }
    };
    auto pts = synthetic(0.8, 0.0);
    expect_degenerate({pts.begin(), pts.begin() + 5}, 200e-6);
    // Grid spanning far less than one fringe period.
    expect_degenerate(pts, 1e-6);
    // Noise the size of the signal.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& p : pts) p.p_up = u(rng);
    expect_degenerate(pts, 200e-6);
}

TEST(Analytic, Examples)
{
    KickPhysics p;
    p.eta = 0.22;
    p.omega_t = kTwoPi * kFtrap;
    for (int k = 1; k <= 5; ++k) EXPECT_NEAR(analytic_contrast(k * kPeriod, p, 10.1), 1.0, 1e-12);
    EXPECT_NEAR(analytic_contrast(0.5 * kPeriod, p, 0.0), std::exp(-8 * 0.0484), 1e-15);
    EXPECT_NEAR(analytic_contrast(0.5 * kPeriod, p, 0.0), 0.679, 5e-4);
    p.eta = 0.0;
    EXPECT_EQ(analytic_contrast(0.37 * kPeriod, p, 10.1), 1.0);
}

TEST(Analytic, AgreesWithSimulationAtVacuum)
{
    const ExperimentConfig c = base_config(0.0, 64);
    for (double f : {0.13, 0.5, 0.77}) {
        EXPECT_NEAR(contrast_at(c, f * kPeriod), analytic_contrast(f * kPeriod, c.physics, 0.0),
                    1e-6)
            << f;
    }
}

TEST(Analytic, ZeroEtaNeverCollapses)
{
    ExperimentConfig c = base_config(10.1);
    c.physics.eta = 0.0;
    EXPECT_NEAR(contrast_at(c, 0.5 * kPeriod), 1.0, 1e-9);
}

TEST(Properties, GlobalPhaseInvariance)
{
    ExperimentConfig c = base_config(1.0, 96);
    const double t = 0.31 * kPeriod;
    c.phi_0 = 0.0;
    const double ref = contrast_at(c, t);
    for (int j = 1; j < 8; ++j) {
        c.phi_0 = kTwoPi * j / 8;
        EXPECT_NEAR(contrast_at(c, t), ref, 1e-9) << c.phi_0;
    }
}

TEST(Properties, MonotoneInTemperature)
{
    const double t = 0.3 * kPeriod;
    double prev = 2.0;
    for (double nb : {0.0, 1.0, 5.0, 10.1, 20.0}) {
        const ExperimentConfig c = base_config(nb, 400);
        const double cc = contrast_at(c, t);
        EXPECT_LE(cc, prev + 1e-12) << nb;
        prev = cc;
    }
}

TEST(Properties, PeriodicInDelay)
{
    const ExperimentConfig c = base_config(10.1);
    for (double f : {0.1, 0.35, 0.6, 0.92}) {
        EXPECT_NEAR(contrast_at(c, f * kPeriod), contrast_at(c, (f + 1.0) * kPeriod), 1e-6);
    }
}

TEST(Properties, EnsembleMatchesDensityMatrix)
{
    for (KickModel model : {KickModel::Ideal, KickModel::Train}) {
        ExperimentConfig c = base_config(1.0, 96, 0);
        c.kick_model = model;
        c.sdk_schedule = equally_spaced_train(4, 5.0 / (12.642815e9 + 489e6), kPi, c.omega_A);
        for (double t : {5e-9, 0.21 * kPeriod, 0.5 * kPeriod}) {
            for (double d : {-1700.0, 0.0, 900.0}) {
                const double dm = ramsey_sequence(c, t, d, RamseyMethod::DensityMatrix);
                const double ens = ramsey_sequence(c, t, d, RamseyMethod::DenseEnsemble);
                EXPECT_NEAR(dm, ens, 1e-10);
                EXPECT_NEAR(ramsey_sequence(c, t, d, RamseyMethod::Fast), ens, 1e-9);
            }
        }
    }
}

TEST(Properties, EnsembleIsWeightedFockAverage)
{
    const ExperimentConfig c = base_config(1.0, 64, 16);
    const ThermalEnsemble w = thermal_weights(1.0, c.dims.invariant_levels());
    const double t = 0.27 * kPeriod;
    double avg = 0.0;
    for (std::size_t n = 0; n < w.weights.size(); ++n) {
        avg += w.weights[n] * ramsey_sequence_fock(c, t, 400.0, static_cast<int>(n));
    }
    EXPECT_NEAR(ramsey_sequence(c, t, 400.0, RamseyMethod::DenseEnsemble), avg, 1e-12);
}

TEST(Properties, ThreadCountDoesNotChangeResult)
{
    const ExperimentConfig c = base_config(10.1);
    const auto grid = linear_grid(0.0, 2 * kPeriod, 11);
    const ContrastCurve a = contrast_vs_delay(c, grid, 1);
    const ContrastCurve b = contrast_vs_delay(c, grid, 3);
    ASSERT_EQ(a.points.size(), b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        EXPECT_EQ(a.points[i].contrast, b.points[i].contrast);
    }
}

TEST(Revival, ContrastScaleMultipliesPeaks)
{
    ExperimentConfig c = base_config(10.1);
    c.contrast_scale = 0.8;
    const double grid[] = {kPeriod, 2 * kPeriod};
    for (const auto& p : contrast_vs_delay(c, grid).points) EXPECT_NEAR(p.contrast, 0.8, 1e-6);
}

TEST(Micromotion, PhaseModel)
{
    MicromotionParams m;
    EXPECT_EQ(micromotion_phase_model(1.234e-7, m), 0.0);
    m.mod_depth = 1.0;
    for (int k = 0; k < 5; ++k) EXPECT_NEAR(micromotion_phase_model(k / m.f_rf, m), 0.0, 1e-12);
    EXPECT_NEAR(micromotion_phase_model(0.25 / m.f_rf, m), 1.0, 1e-12);
}

TEST(Micromotion, ZeroDepthReducesToPlainPath)
{
    ExperimentConfig c = base_config(10.1);
    const double plain = contrast_at(c, 0.93 * kPeriod);
    c.micromotion = MicromotionParams{};
    EXPECT_EQ(contrast_at(c, 0.93 * kPeriod), plain);
}

TEST(Micromotion, ReducesContrastOffRfPeriod)
{
    ExperimentConfig c = base_config(1.0, 96);
    c.micromotion = MicromotionParams{0.5, 17.9e6, 0.0, 16};
    // At an RF-period multiple the modulation cancels between the two kicks.
    const double on = contrast_at(c, 24.0 / 17.9e6);
    const double off = contrast_at(c, 24.5 / 17.9e6);
    EXPECT_GT(on, off);
}

TEST(Diffraction, KapitzaDiracStatistics)
{
    KickPhysics p;
    p.eta = 0.22;
    p.omega_t = kTwoPi * kFtrap;
    const HilbertDims dims(128);
    const DiffractionTable t01 = kapitza_dirac_populations(0.1, p, dims);
    for (const auto& o : t01.orders) {
        if (o.n == 0) EXPECT_NEAR(o.bessel, 0.99501, 5e-6);
    }
    for (double theta : {0.1, kPi / 8, kPi / 2}) {
        const DiffractionTable t = kapitza_dirac_populations(theta, p, dims);
        EXPECT_NEAR(t.bessel_total, 1.0, 1e-12);
        EXPECT_NEAR(t.flip_probability, t.bessel_odd, 1e-8);
        EXPECT_LT(t.max_odd_unflipped, 1e-10);
        for (const auto& o : t.orders) {
            EXPECT_NEAR(o.fourier, o.bessel, 1e-10) << o.n;
            if (o.n % 2 == 0) EXPECT_NEAR(o.unflipped, o.fourier, 1e-10);
        }
    }
    EXPECT_THROW(kapitza_dirac_populations(0.0, p, dims), Error);
    EXPECT_THROW(kapitza_dirac_populations(4.0, p, dims), Error);
}

TEST(Config, ValidationNamesKey)
{
    ExperimentConfig c = base_config(10.1);
    c.delta_grid = {-1.0, 0.0, 2.0};
    try {
        c.validate();
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::RangeError);
        EXPECT_EQ(e.key(), "delta_grid");
    }
    c = base_config(10.1);
    c.contrast_scale = 1.5;
    EXPECT_THROW(c.validate(), Error);
}

TEST(LambDicke, PhysicalConstants)
{
    EXPECT_NEAR(lamb_dicke_parameter(355e-9, 171.0, 743e3), 0.22, 0.005);
}
