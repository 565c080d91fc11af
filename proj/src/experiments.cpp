#include "sdk/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "sdk/errors.hpp"

namespace sdk {

namespace {

// Pairs of kick orders whose spin weight on the initial state is below this
// are dropped from the fast Ramsey composition.
constexpr double kNegligibleWeight = 1e-15;
// Larger weights that do not fit the Fock cutoff are an error.
constexpr double kCutoffWeight = 1e-12;

void require(bool ok, const char* key, const std::string& msg)
{
    if (!ok) throw Error(ErrorKind::RangeError, msg, key);
}

double wrapped(double x) { return std::remainder(x, kTwoPi); }

} // namespace

double micromotion_phase_model(double t, const MicromotionParams& params)
{
    if (!(params.mod_depth >= 0.0)) {
        throw Error(ErrorKind::RangeError, "mod_depth must be >= 0", "mod_depth");
    }
    if (params.mod_depth == 0.0) return 0.0;
    return params.mod_depth * std::sin(wrapped(kTwoPi * params.f_rf * t) + params.phase);
}

void ExperimentConfig::validate() const
{
    require(std::isfinite(n_bar) && n_bar >= 0.0, "n_bar", "n_bar must be >= 0");
    require(ramsey_separation > 0.0, "ramsey_separation", "ramsey separation must be positive");
    require(contrast_scale > 0.0 && contrast_scale <= 1.0, "contrast_scale",
            "contrast_scale must lie in (0, 1]");
    require(physics.eta >= 0.0, "eta", "eta must be >= 0");
    require(physics.omega_t > 0.0, "f_trap", "trap frequency must be positive");
    require(truncation_budget > 0.0 && truncation_budget < 1.0, "truncation_budget",
            "truncation budget must lie in (0, 1)");
    require(!delta_grid.empty(), "delta_grid", "detuning grid is empty");
    std::vector<double> sorted = delta_grid;
    std::sort(sorted.begin(), sorted.end());
    const double scale = std::max(std::abs(sorted.front()), std::abs(sorted.back()));
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        require(std::abs(sorted[i] + sorted[sorted.size() - 1 - i]) <= 1e-9 * scale + 1e-12,
                "delta_grid", "detuning grid must be symmetric about 0");
    }
    if (micromotion) {
        require(micromotion->mod_depth >= 0.0, "mod_depth", "mod_depth must be >= 0");
        require(micromotion->f_rf > 0.0, "f_rf", "RF frequency must be positive");
        require(micromotion->rf_phase_samples >= 1, "rf_phase_samples",
                "need at least one RF phase sample");
    }
    if (kick_model == KickModel::Train) sdk_schedule.validate();
}

std::vector<double> linear_grid(double lo, double hi, int points)
{
    if (points < 1) throw Error(ErrorKind::RangeError, "grid needs at least one point", "points");
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i) {
        g[i] = points == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (points - 1);
    }
    return g;
}

Matrix2 microwave_rotation_matrix(double angle, double axis_phase)
{
    const Matrix2 axis = std::cos(axis_phase) * pauli::sigma_x() + std::sin(axis_phase) * pauli::sigma_y();
    return std::cos(0.5 * angle) * Matrix2::Identity() - cplx(0.0, std::sin(0.5 * angle)) * axis;
}

DenseOperator microwave_rotation(double angle, double axis_phase, const HilbertDims& dims)
{
    return DenseOperator::spin_only(dims, microwave_rotation_matrix(angle, axis_phase));
}

//
// Kicks in the Ramsey frame
//

namespace {

MicromotionParams micromotion_at(const ExperimentConfig& c, double rf_phase)
{
    MicromotionParams m = c.micromotion.value_or(MicromotionParams{});
    if (!c.micromotion) m.mod_depth = 0.0;
    m.phase = rf_phase;
    return m;
}

std::vector<double> rf_phases(const ExperimentConfig& c)
{
    if (!c.micromotion || c.micromotion->mod_depth == 0.0) {
        return {c.micromotion ? c.micromotion->phase : 0.0};
    }
    const int k = c.micromotion->rf_phase_samples;
    std::vector<double> out(k);
    for (int j = 0; j < k; ++j) out[j] = c.micromotion->phase + kTwoPi * j / k;
    return out;
}

// Free motional time between the two kicks.
double free_time(const ExperimentConfig& c, double kick_delay)
{
    if (!(kick_delay >= 0.0) || kick_delay > c.ramsey_separation) {
        throw Error(ErrorKind::InvalidArgument,
                    "kick delay must lie in [0, ramsey_separation]", "kick_delay");
    }
    if (c.kick_model != KickModel::Train) return kick_delay;
    const double d = c.sdk_schedule.duration();
    if (kick_delay < d) {
        throw Error(ErrorKind::InvalidArgument, "kick delay shorter than the pulse train",
                    "kick_delay");
    }
    return kick_delay - d;
}

std::vector<double> ensemble_weights(const ExperimentConfig& c)
{
    auto w = thermal_weights(c.n_bar, c.dims.invariant_levels(), c.truncation_budget).weights;
    while (w.size() > 1 && w.back() == 0.0) w.pop_back();
    return w;
}

// Spin vector after the first pi/2 pulse on |down>.
Eigen::Vector2cd first_pulse_spin()
{
    return microwave_rotation_matrix(kPi / 2.0, 0.0).col(0);
}

// Reduced spin density matrix from the motional amplitudes of both branches,
// column n belonging to ensemble member n.
Matrix2 reduce(const Matrix& down, const Matrix& up, const std::vector<double>& w)
{
    Matrix2 rho = Matrix2::Zero();
    for (std::size_t n = 0; n < w.size(); ++n) {
        const auto i = static_cast<Eigen::Index>(n);
        rho(0, 0) += w[n] * down.col(i).squaredNorm();
        rho(1, 1) += w[n] * up.col(i).squaredNorm();
        rho(0, 1) += w[n] * up.col(i).dot(down.col(i));
    }
    rho(1, 0) = std::conj(rho(0, 1));
    return rho;
}

Matrix2 fast_state(const ExperimentConfig& c, const MomentumExpansion& e1,
                   const MomentumExpansion& e2, double tau, const std::vector<double>& w)
{
    const int n = c.dims.fock();
    const int m = static_cast<int>(w.size());
    const Eigen::Vector2cd v0 = first_pulse_spin();
    const double eta = c.physics.eta;
    const cplx rot = std::polar(1.0, wrapped(c.physics.omega_t * tau));
    Matrix down = Matrix::Zero(n, m);
    Matrix up = Matrix::Zero(n, m);
    // D(i k eta) F(tau) D(i l eta) = F(tau) e^{i Im(a conj(b))} D(a + b), with
    // a = i k eta e^{i omega_t tau}, b = i l eta. The common F drops out of all
    // spin populations and coherences.
    for (const auto& [k, s2] : e2.coefficients()) {
        for (const auto& [l, s1] : e1.coefficients()) {
            const Eigen::Vector2cd spin = s2 * (s1 * v0);
            const double weight = spin.cwiseAbs().maxCoeff();
            if (weight < kNegligibleWeight) continue;
            const cplx a = cplx(0.0, k * eta) * rot;
            const cplx b(0.0, l * eta);
            const cplx g = a + b;
            if (std::norm(g) > n / 4.0) {
                if (weight < kCutoffWeight) continue;
                std::ostringstream msg;
                msg << "kick orders (" << k << ", " << l << ") do not fit Fock cutoff " << n;
                throw Error(ErrorKind::CutoffTooSmall, msg.str(), "fock_cutoff");
            }
            const cplx phase = std::polar(1.0, std::imag(a * std::conj(b)));
            const Matrix d = displacement_matrix(g, n).leftCols(m);
            down += (phase * spin(0)) * d;
            up += (phase * spin(1)) * d;
        }
    }
    return reduce(down, up, w);
}

// Everything before the second pi/2 pulse as a dense operator.
Matrix dense_sequence(const ExperimentConfig& c, const MomentumExpansion& e1,
                      const MomentumExpansion& e2, double tau)
{
    const DenseOperator r1 = microwave_rotation(kPi / 2.0, 0.0, c.dims);
    const DenseOperator k1 = e1.to_operator(c.physics.eta, c.dims);
    const DenseOperator k2 = e2.to_operator(c.physics.eta, c.dims);
    const DenseOperator f = free_motional_evolution(c.physics.omega_t, tau, c.dims);
    return (k2 * (f * (k1 * r1))).matrix();
}

Matrix2 dense_ensemble_state(const ExperimentConfig& c, const Matrix& v,
                             const std::vector<double>& w)
{
    const int n = c.dims.fock();
    const int m = static_cast<int>(w.size());
    // Column n of v is the image of |down, n>.
    return reduce(v.block(0, 0, n, m), v.block(n, 0, n, m), w);
}

Matrix2 density_matrix_state(const ExperimentConfig& c, const Matrix& v,
                             const std::vector<double>& w)
{
    const int n = c.dims.fock();
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(2 * n);
    for (std::size_t i = 0; i < w.size(); ++i) diag(static_cast<Eigen::Index>(i)) = w[i];
    const Matrix rho = v * diag.cast<cplx>().asDiagonal() * v.adjoint();
    Matrix2 out;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) out(a, b) = rho.block(a * n, b * n, n, n).trace();
    }
    return out;
}

Matrix2 spin_state_for(const ExperimentConfig& c, double kick_delay, RamseyMethod method,
                       const std::vector<double>& w)
{
    const double tau = free_time(c, kick_delay);
    const auto phases = rf_phases(c);
    Matrix2 rho = Matrix2::Zero();
    for (double rf : phases) {
        const MomentumExpansion e1 = sdk_in_rotating_frame(c, 0.0, rf);
        const MomentumExpansion e2 = sdk_in_rotating_frame(c, kick_delay, rf);
        switch (method) {
        case RamseyMethod::Fast: rho += fast_state(c, e1, e2, tau, w); break;
        case RamseyMethod::DenseEnsemble:
            rho += dense_ensemble_state(c, dense_sequence(c, e1, e2, tau), w);
            break;
        case RamseyMethod::DensityMatrix:
            rho += density_matrix_state(c, dense_sequence(c, e1, e2, tau), w);
            break;
        }
    }
    rho /= static_cast<double>(phases.size());
    double total = 0.0;
    for (double x : w) total += x;
    const double norm = rho.trace().real();
    if (std::abs(norm - total) > c.truncation_budget) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "ensemble norm " << norm << " vs weight " << total << " left the truncation budget";
        throw Error(ErrorKind::NormLoss, msg.str(), "fock_cutoff");
    }
    return rho;
}

double p_up_after_second_pulse(const Matrix2& rho, double delta, double separation)
{
    const Matrix2 r = microwave_rotation_matrix(kPi / 2.0, wrapped(kTwoPi * delta * separation));
    const Matrix2 out = r * rho * r.adjoint();
    return std::clamp(out(1, 1).real(), 0.0, 1.0);
}

} // namespace

MomentumExpansion sdk_in_rotating_frame(const ExperimentConfig& config, double t, double rf_phase)
{
    const MicromotionParams mm = micromotion_at(config, rf_phase);
    switch (config.kick_model) {
    case KickModel::None: return MomentumExpansion::identity();
    case KickModel::Ideal: {
        const double psi = config.phi_0 + wrapped(config.omega_A * t) +
                           micromotion_phase_model(t, mm) +
                           branch_sign(config.sign) * wrapped(config.physics.omega_hf * t);
        return ideal_sdk_expansion(psi, config.sign);
    }
    case KickModel::Train: break;
    }
    TrainSchedule s = config.sdk_schedule;
    s.omega_A = config.omega_A;
    s.phi_0 = config.phi_0;
    s.sign = config.sign;
    for (auto& p : s.pulses) {
        p.arrival_time += t;
        p.phase_offset += micromotion_phase_model(p.arrival_time, mm);
    }
    MomentumExpansion e = train_expansion(s, config.physics);
    const double omega_hf = config.physics.omega_hf;
    e.left_multiply_spin(qubit_phase_matrix(omega_hf, s.pulses.back().arrival_time).adjoint());
    e.right_multiply_spin(qubit_phase_matrix(omega_hf, s.pulses.front().arrival_time));
    return e;
}

Matrix2 ramsey_spin_state(const ExperimentConfig& config, double kick_delay, RamseyMethod method)
{
    config.validate();
    return spin_state_for(config, kick_delay, method, ensemble_weights(config));
}

double ramsey_sequence(const ExperimentConfig& config, double kick_delay, double delta,
                       RamseyMethod method)
{
    return p_up_after_second_pulse(ramsey_spin_state(config, kick_delay, method), delta,
                                   config.ramsey_separation);
}

double ramsey_sequence_fock(const ExperimentConfig& config, double kick_delay, double delta,
                            int fock_level)
{
    config.validate();
    if (fock_level < 0 || fock_level >= config.dims.invariant_levels()) {
        throw Error(ErrorKind::RangeError, "Fock level outside the invariant block", "fock_level");
    }
    std::vector<double> w(fock_level + 1, 0.0);
    w.back() = 1.0;
    const Matrix2 rho = spin_state_for(config, kick_delay, RamseyMethod::Fast, w);
    return p_up_after_second_pulse(rho, delta, config.ramsey_separation);
}

std::vector<FringePoint> ramsey_scan(const ExperimentConfig& config, double kick_delay,
                                     RamseyMethod method)
{
    const Matrix2 rho = ramsey_spin_state(config, kick_delay, method);
    std::vector<FringePoint> out;
    out.reserve(config.delta_grid.size());
    for (double d : config.delta_grid) {
        out.push_back({d, p_up_after_second_pulse(rho, d, config.ramsey_separation)});
    }
    return out;
}

double fringe_contrast(std::span<const FringePoint> points, double ramsey_separation)
{
    if (points.size() < 8) {
        throw Error(ErrorKind::FitDegenerate, "need at least 8 fringe points", "delta_grid");
    }
    double lo = points.front().delta;
    double hi = lo;
    Eigen::Matrix2d normal = Eigen::Matrix2d::Zero();
    Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
    for (const auto& p : points) {
        lo = std::min(lo, p.delta);
        hi = std::max(hi, p.delta);
        const double x = kTwoPi * p.delta * ramsey_separation;
        const Eigen::Vector2d basis(std::cos(x), std::sin(x));
        normal += basis * basis.transpose();
        rhs += basis * (p.p_up - 0.5);
    }
    if ((hi - lo) * ramsey_separation < 1.0) {
        throw Error(ErrorKind::FitDegenerate, "detuning grid spans less than one fringe period",
                    "delta_grid");
    }
    const double scale = normal.trace();
    if (std::abs(normal.determinant()) < 1e-6 * scale * scale) {
        throw Error(ErrorKind::FitDegenerate, "fringe grid does not resolve the period",
                    "delta_grid");
    }
    const Eigen::Vector2d ab = normal.ldlt().solve(rhs);
    double sq = 0.0;
    for (const auto& p : points) {
        const double x = kTwoPi * p.delta * ramsey_separation;
        const double r = p.p_up - 0.5 - ab(0) * std::cos(x) - ab(1) * std::sin(x);
        sq += r * r;
    }
    if (std::sqrt(sq / static_cast<double>(points.size())) > 0.05) {
        throw Error(ErrorKind::FitDegenerate, "fringe residual too large for a sinusoid",
                    "delta_grid");
    }
    return std::clamp(2.0 * ab.norm(), 0.0, 1.0);
}

ContrastCurve contrast_vs_delay(const ExperimentConfig& config, std::span<const double> delays,
                                int threads)
{
    config.validate();
    if (delays.empty()) throw Error(ErrorKind::RangeError, "delay grid is empty", "delays");
    const auto w = ensemble_weights(config);
    ContrastCurve curve;
    curve.points.resize(delays.size());
    auto work = [&](std::size_t i) {
        const Matrix2 rho = spin_state_for(config, delays[i], RamseyMethod::Fast, w);
        std::vector<FringePoint> pts;
        for (double d : config.delta_grid) {
            pts.push_back({d, p_up_after_second_pulse(rho, d, config.ramsey_separation)});
        }
        curve.points[i] = {delays[i],
                           config.contrast_scale * fringe_contrast(pts, config.ramsey_separation)};
    };
    const std::size_t workers =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, delays.size());
    if (workers == 1) {
        for (std::size_t i = 0; i < delays.size(); ++i) work(i);
        return curve;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    const std::size_t block = (delays.size() + workers - 1) / workers;
    for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t * block; i < std::min(delays.size(), (t + 1) * block); ++i) {
                    work(i);
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return curve;
}

double analytic_contrast(double kick_delay, const KickPhysics& physics, double n_bar)
{
    const double c = std::cos(wrapped(physics.omega_t * kick_delay));
    return std::exp(-4.0 * physics.eta * physics.eta * (2.0 * n_bar + 1.0) * (1.0 - c));
}

//
// Kapitza-Dirac diffraction
//

DiffractionTable kapitza_dirac_populations(double theta, const KickPhysics& physics,
                                           const HilbertDims& dims, int phase_samples)
{
    if (!(theta > 0.0) || theta > kPi) {
        throw Error(ErrorKind::InvalidArgument, "theta must lie in (0, pi]", "theta");
    }
    const int cutoff = kick_bessel_cutoff(theta, physics);
    const int k = std::max(phase_samples, 2 * cutoff + 2);
    const int n = dims.fock();
    const int start = dims.index(Spin::Down, 0);

    std::vector<Vector> columns;
    columns.reserve(k);
    DiffractionTable table;
    table.theta = theta;
    for (int j = 0; j < k; ++j) {
        const double phi = kTwoPi * j / k;
        columns.push_back(kick_pulse_operator(theta, phi, physics, dims).matrix().col(start));
        const double flip = columns.back().segment(n, n).squaredNorm();
        table.flip_probability += flip / k;
        if (j == 0) table.flip_probability_phase0 = flip;
    }

    for (int order = -cutoff; order <= cutoff; ++order) {
        Vector psi = Vector::Zero(2 * n);
        for (int j = 0; j < k; ++j) psi += std::polar(1.0 / k, -order * kTwoPi * j / k) * columns[j];
        DiffractionOrder o;
        o.n = order;
        const double jn = bessel_j(order, theta);
        o.bessel = jn * jn;
        o.fourier = psi.squaredNorm();
        o.unflipped = psi.head(n).squaredNorm();
        const bool odd = (order % 2) != 0;
        const cplx alpha(0.0, order * physics.eta);
        if (std::norm(alpha) <= n / 4.0) {
            const Vector coh = displacement_matrix(alpha, n).col(0);
            o.projection = std::norm(coh.dot(columns[0].segment(odd ? n : 0, n)));
        } else {
            o.projection = std::numeric_limits<double>::quiet_NaN();
        }
        table.bessel_total += o.bessel;
        if (odd) {
            table.bessel_odd += o.bessel;
            table.max_odd_unflipped = std::max(table.max_odd_unflipped, o.unflipped);
        }
        table.orders.push_back(o);
    }
    return table;
}

double lamb_dicke_parameter(double wavelength_m, double mass_u, double f_trap_hz)
{
    constexpr double hbar = 1.054571817e-34;
    constexpr double atomic_mass = 1.66053906660e-27;
    const double k = kTwoPi / wavelength_m;
    const double omega = kTwoPi * f_trap_hz;
    return 2.0 * k * std::sqrt(hbar / (2.0 * mass_u * atomic_mass * omega));
}

} // namespace sdk
