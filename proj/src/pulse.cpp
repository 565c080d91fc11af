#include "sdk/pulse.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "sdk/errors.hpp"

namespace sdk {

namespace {

constexpr double kBesselTail = 1e-12;

// Orders whose spin coefficient is below this may be dropped when their
// displacement does not fit the Fock cutoff.
constexpr double kNegligibleOrder = 1e-12;

double max_abs(const Matrix2& m) { return m.cwiseAbs().maxCoeff(); }

// exp(M) for a traceless anti-Hermitian 2x2 M.
Matrix2 exp_su2(const Matrix2& m)
{
    const Matrix2 g = cplx(0.0, 1.0) * m; // Hermitian, m = -i g
    const double cz = 0.5 * (g(0, 0) - g(1, 1)).real();
    const double r = std::sqrt(cz * cz + std::norm(g(0, 1)));
    Matrix2 gen = Matrix2::Zero();
    gen(0, 0) = cz;
    gen(1, 1) = -cz;
    gen(0, 1) = g(0, 1);
    gen(1, 0) = std::conj(g(0, 1));
    const double s = r > 0.0 ? std::sin(r) / r : 1.0;
    return std::cos(r) * Matrix2::Identity() - cplx(0.0, s) * gen;
}

} // namespace

//
// Schedules
//

void TrainSchedule::validate() const
{
    if (pulses.empty()) {
        throw Error(ErrorKind::InvalidSchedule, "pulse train is empty", "pulses");
    }
    for (std::size_t i = 0; i < pulses.size(); ++i) {
        const auto& p = pulses[i];
        if (!std::isfinite(p.theta) || p.theta <= 0.0) {
            throw Error(ErrorKind::InvalidSchedule, "pulse area must be positive", "theta");
        }
        if (!std::isfinite(p.arrival_time) || !std::isfinite(p.phase_offset)) {
            throw Error(ErrorKind::InvalidSchedule, "non-finite pulse parameter", "pulses");
        }
        if (i > 0 && !(p.arrival_time > pulses[i - 1].arrival_time)) {
            throw Error(ErrorKind::InvalidSchedule, "arrival times must be strictly increasing",
                        "arrival_time");
        }
    }
}

double TrainSchedule::duration() const
{
    if (pulses.empty()) return 0.0;
    return pulses.back().arrival_time - pulses.front().arrival_time;
}

double TrainSchedule::total_area() const
{
    double s = 0.0;
    for (const auto& p : pulses) s += p.theta;
    return s;
}

double TrainSchedule::pulse_phase(std::size_t i) const
{
    const auto& p = pulses.at(i);
    return omega_A * p.arrival_time + phi_0 + p.phase_offset;
}

TrainSchedule equally_spaced_train(int m, double spacing, double total_area, double omega_A,
                                   double phi_0, SignBranch sign)
{
    if (m < 1) throw Error(ErrorKind::InvalidSchedule, "need at least one pulse", "m");
    if (m > 1 && !(spacing > 0.0)) {
        throw Error(ErrorKind::InvalidSchedule, "pulse spacing must be positive", "spacing");
    }
    TrainSchedule s;
    s.omega_A = omega_A;
    s.phi_0 = phi_0;
    s.sign = sign;
    for (int i = 0; i < m; ++i) {
        s.pulses.push_back({i * spacing, total_area / m, 0.0});
    }
    return s;
}

//
// Bessel functions
//

double bessel_j(int n, double x)
{
    const int m = std::abs(n);
    double v = std::cyl_bessel_j(static_cast<double>(m), std::abs(x));
    const bool odd = (m % 2) != 0;
    if (odd && n < 0) v = -v;
    if (odd && x < 0.0) v = -v;
    return v;
}

int bessel_cutoff_for(double theta, double tail)
{
    if (!std::isfinite(theta)) {
        throw Error(ErrorKind::InvalidArgument, "theta must be finite", "theta");
    }
    const double a = std::abs(theta);
    const int top = static_cast<int>(std::ceil(a)) + 60;
    // suffix[k] = sum_{j >= k} J_j^2, accumulated from the top so tiny terms
    // are not lost against 1.
    std::vector<double> suffix(top + 2, 0.0);
    for (int k = top; k >= 0; --k) {
        const double j = bessel_j(k, a);
        suffix[k] = suffix[k + 1] + j * j;
    }
    for (int n = 0; n <= top; ++n) {
        if (2.0 * suffix[n + 1] <= tail) return n;
    }
    return top;
}

int kick_bessel_cutoff(double theta, const KickPhysics& physics)
{
    if (physics.bessel_cutoff <= 0) return bessel_cutoff_for(theta, kAdaptiveBesselTail);
    const int needed = bessel_cutoff_for(theta, kBesselTail);
    if (physics.bessel_cutoff < needed) {
        std::ostringstream msg;
        msg << "Bessel cutoff " << physics.bessel_cutoff << " leaves tail above " << kBesselTail
            << " for theta = " << theta << " (need " << needed << ")";
        throw Error(ErrorKind::BesselCutoffTooSmall, msg.str(), "bessel_cutoff");
    }
    return physics.bessel_cutoff;
}

//
// Momentum expansion
//

MomentumExpansion MomentumExpansion::identity() { return spin(Matrix2::Identity()); }

MomentumExpansion MomentumExpansion::spin(const Matrix2& s)
{
    MomentumExpansion e;
    e.coeffs_[0] = s;
    return e;
}

MomentumExpansion MomentumExpansion::from_orders(std::map<int, Matrix2> coefficients)
{
    MomentumExpansion e;
    e.coeffs_ = std::move(coefficients);
    return e;
}

MomentumExpansion MomentumExpansion::kick(double theta, double phi, int bessel_cutoff)
{
    MomentumExpansion e;
    const Matrix2 sx = pauli::sigma_x();
    const Matrix2 id = Matrix2::Identity();
    for (int n = -bessel_cutoff; n <= bessel_cutoff; ++n) {
        const cplx c = std::polar(bessel_j(n, theta), n * phi);
        e.coeffs_[n] = c * ((n % 2 != 0) ? sx : id);
    }
    return e;
}

void MomentumExpansion::left_multiply(const MomentumExpansion& lhs)
{
    std::map<int, Matrix2> out;
    for (const auto& [a, A] : lhs.coeffs_) {
        for (const auto& [b, B] : coeffs_) {
            auto it = out.try_emplace(a + b, Matrix2::Zero()).first;
            it->second.noalias() += A * B;
        }
    }
    coeffs_ = std::move(out);
}

void MomentumExpansion::left_multiply_spin(const Matrix2& s)
{
    for (auto& [k, c] : coeffs_) c = s * c;
}

void MomentumExpansion::right_multiply_spin(const Matrix2& s)
{
    for (auto& [k, c] : coeffs_) c = c * s;
}

void MomentumExpansion::prune(double threshold)
{
    std::erase_if(coeffs_, [threshold](const auto& kv) { return max_abs(kv.second) < threshold; });
}

int MomentumExpansion::max_order() const
{
    int m = 0;
    for (const auto& [k, c] : coeffs_) m = std::max(m, std::abs(k));
    return m;
}

DenseOperator MomentumExpansion::to_operator(double eta, const HilbertDims& dims) const
{
    const int n = dims.fock();
    Matrix out = Matrix::Zero(dims.dim(), dims.dim());
    for (const auto& [k, c] : coeffs_) {
        const double x = (k * eta) * (k * eta);
        if (x > n / 4.0) {
            if (max_abs(c) < kNegligibleOrder) continue;
            std::ostringstream msg;
            msg << "momentum order " << k << " with weight " << max_abs(c)
                << " does not fit Fock cutoff " << n;
            throw Error(ErrorKind::CutoffTooSmall, msg.str(), "fock_cutoff");
        }
        const Matrix d = displacement_matrix(cplx(0.0, k * eta), n);
        for (int r = 0; r < 2; ++r) {
            for (int s = 0; s < 2; ++s) {
                if (c(r, s) != cplx(0.0)) out.block(r * n, s * n, n, n) += c(r, s) * d;
            }
        }
    }
    return {dims, std::move(out)};
}

//
// Kicks and trains
//

DenseOperator kick_pulse_operator(double theta, double phi, const KickPhysics& physics,
                                  const HilbertDims& dims)
{
    if (!std::isfinite(theta) || !std::isfinite(phi)) {
        throw Error(ErrorKind::InvalidArgument, "theta and phi must be finite", "theta");
    }
    const int cutoff = kick_bessel_cutoff(theta, physics);
    return MomentumExpansion::kick(theta, phi, cutoff).to_operator(physics.eta, dims);
}

MomentumExpansion train_expansion(const TrainSchedule& schedule, const KickPhysics& physics)
{
    schedule.validate();
    MomentumExpansion e = MomentumExpansion::identity();
    for (std::size_t i = 0; i < schedule.pulses.size(); ++i) {
        const auto& p = schedule.pulses[i];
        if (i > 0) {
            const double dt = p.arrival_time - schedule.pulses[i - 1].arrival_time;
            e.left_multiply_spin(qubit_phase_matrix(physics.omega_hf, dt));
        }
        const int cutoff = kick_bessel_cutoff(p.theta, physics);
        e.left_multiply(MomentumExpansion::kick(p.theta, schedule.pulse_phase(i), cutoff));
        e.prune();
    }
    return e;
}

DenseOperator train_operator(const TrainSchedule& schedule, const KickPhysics& physics,
                             const HilbertDims& dims)
{
    return train_expansion(schedule, physics).to_operator(physics.eta, dims);
}

MomentumExpansion ideal_sdk_expansion(double phi_prime, SignBranch sign)
{
    const Matrix2 fwd = sign == SignBranch::Plus ? pauli::raise() : pauli::lower();
    const Matrix2 back = sign == SignBranch::Plus ? pauli::lower() : pauli::raise();
    std::map<int, Matrix2> c;
    c[1] = std::polar(1.0, phi_prime) * fwd;
    c[-1] = -std::polar(1.0, -phi_prime) * back;
    return MomentumExpansion::from_orders(std::move(c));
}

DenseOperator ideal_sdk_operator(const KickPhysics& physics, double phi_prime, SignBranch sign,
                                 const HilbertDims& dims)
{
    return ideal_sdk_expansion(phi_prime, sign).to_operator(physics.eta, dims);
}

double fit_sdk_phase(const DenseOperator& candidate, const KickPhysics& physics, SignBranch sign)
{
    const auto& dims = candidate.dims();
    const int n = dims.fock();
    const Vector coh_fwd = displacement_matrix(cplx(0.0, physics.eta), n).col(0);
    const Vector coh_back = displacement_matrix(cplx(0.0, -physics.eta), n).col(0);
    const Spin from = sign == SignBranch::Plus ? Spin::Down : Spin::Up;
    const Spin to = sign == SignBranch::Plus ? Spin::Up : Spin::Down;
    const Matrix& m = candidate.matrix();
    // a ~ e^{i(chi + phi')}, b ~ -e^{i(chi - phi')}
    const cplx a = coh_fwd.dot(m.col(dims.index(from, 0)).segment(dims.index(to, 0), n));
    const cplx b = coh_back.dot(m.col(dims.index(to, 0)).segment(dims.index(from, 0), n));
    if (std::abs(a) < 1e-6 || std::abs(b) < 1e-6) {
        throw Error(ErrorKind::FitDegenerate, "candidate has no spin-flip amplitude to fit phi'");
    }
    return 0.5 * (std::arg(a) - std::arg(-b));
}

std::vector<SpinOscState> cardinal_probes(const HilbertDims& dims)
{
    const double r = 1.0 / std::sqrt(2.0);
    return {
        SpinOscState::product(dims, 1.0, 0.0, 0),
        SpinOscState::product(dims, 0.0, 1.0, 0),
        SpinOscState::product(dims, r, r, 0),
        SpinOscState::product(dims, r, -r, 0),
    };
}

FidelityReport sdk_fidelity(const DenseOperator& candidate, const DenseOperator& ideal,
                            std::span<const SpinOscState> probes)
{
    if (!(candidate.dims() == ideal.dims())) {
        throw Error(ErrorKind::DimensionMismatch, "candidate and ideal live in different spaces");
    }
    if (probes.empty()) throw Error(ErrorKind::InvalidArgument, "no probe states", "probes");
    FidelityReport rep;
    rep.fidelity = std::numeric_limits<double>::infinity();
    cplx total = 0.0;
    for (const auto& p : probes) {
        if (!(p.dims() == candidate.dims())) {
            throw Error(ErrorKind::DimensionMismatch, "probe state dimension differs");
        }
        const Vector c = candidate.matrix() * p.amplitudes();
        const Vector i = ideal.matrix() * p.amplitudes();
        const cplx amp = i.dot(c);
        total += amp;
        rep.per_probe.push_back(std::norm(amp));
        rep.fidelity = std::min(rep.fidelity, std::norm(amp));
    }
    rep.global_phase = std::arg(total);
    rep.reference_states = std::to_string(probes.size()) + " probe states";
    return rep;
}

FidelityReport sdk_fidelity(const DenseOperator& candidate, const DenseOperator& ideal,
                            const ThermalEnsemble& ensemble)
{
    if (!(candidate.dims() == ideal.dims())) {
        throw Error(ErrorKind::DimensionMismatch, "candidate and ideal live in different spaces");
    }
    const auto& dims = candidate.dims();
    const int n = dims.fock();
    const int levels = static_cast<int>(ensemble.weights.size());
    if (levels > n) {
        throw Error(ErrorKind::DimensionMismatch, "thermal ensemble exceeds the Fock cutoff");
    }
    const double r = 1.0 / std::sqrt(2.0);
    const std::array<std::pair<cplx, cplx>, 4> spins{
        {{1.0, 0.0}, {0.0, 1.0}, {r, r}, {r, -r}}};
    const Matrix& cm = candidate.matrix();
    const Matrix& im = ideal.matrix();
    FidelityReport rep;
    rep.fidelity = std::numeric_limits<double>::infinity();
    rep.reference_states = "|down>,|up>,|+>,|-> (x) thermal";
    cplx total = 0.0;
    for (const auto& [cd, cu] : spins) {
        // Column k of U applied to c_d|down,k> + c_u|up,k>.
        const Matrix c = cd * cm.leftCols(levels) + cu * cm.middleCols(n, levels);
        const Matrix i = cd * im.leftCols(levels) + cu * im.middleCols(n, levels);
        double f = 0.0;
        for (int k = 0; k < levels; ++k) {
            const cplx amp = i.col(k).dot(c.col(k));
            f += ensemble.weights[k] * std::norm(amp);
            total += ensemble.weights[k] * amp;
        }
        rep.per_probe.push_back(f);
        rep.fidelity = std::min(rep.fidelity, f);
    }
    rep.global_phase = std::arg(total);
    return rep;
}

TrainFidelity train_fidelity(const TrainSchedule& schedule, const KickPhysics& physics,
                             const HilbertDims& dims)
{
    const DenseOperator op = train_operator(schedule, physics, dims);
    TrainFidelity out;
    out.phi_prime = fit_sdk_phase(op, physics, schedule.sign);
    const DenseOperator ideal = ideal_sdk_operator(physics, out.phi_prime, schedule.sign, dims);
    const auto probes = cardinal_probes(dims);
    out.report = sdk_fidelity(op, ideal, probes);
    out.report.reference_states = "|down,0>,|up,0>,|+,0>,|-,0>";
    out.flip_probability = op.apply(probes[0]).spin_population(Spin::Up);
    return out;
}

//
// Finite-duration integrator
//
// The coupling is diagonal in the eigenbasis of X = eta (a + a^dag), so without
// the trap term the Hamiltonian splits into N independent two-level problems,
// H_j(t) = -(omega_hf / 2) sigma_z - Omega(t) sin(x_j + phi(t)) sigma_x,
// each stepped with the fourth-order Magnus scheme. The trap term, when
// enabled, is added by Strang splitting around every step.
//

namespace {

struct Envelope {
    PulseShape shape;
    double amplitude; // rad/s at the peak
    double sigma;     // Gaussian width
    double window;

    double operator()(double t) const
    {
        if (shape == PulseShape::Square) return amplitude;
        return amplitude * std::exp(-t * t / (2.0 * sigma * sigma));
    }
};

Envelope make_envelope(double theta, double tau, PulseShape shape, double window_fwhm)
{
    if (shape == PulseShape::Square) return {shape, theta / tau, 0.0, tau};
    const double sigma = tau / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    const double window = 2.0 * window_fwhm * tau;
    const double area =
        sigma * std::sqrt(kTwoPi) * std::erf(window / (2.0 * std::sqrt(2.0) * sigma));
    return {shape, theta / area, sigma, window};
}

struct XBasis {
    Eigen::VectorXd x;
    Eigen::MatrixXd v; // X = v diag(x) v^T
};

XBasis position_basis(double eta, int n)
{
    Eigen::MatrixXd xm = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k + 1 < n; ++k) {
        xm(k, k + 1) = xm(k + 1, k) = eta * std::sqrt(static_cast<double>(k + 1));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(xm);
    return {es.eigenvalues(), es.eigenvectors()};
}

// One Magnus step for the two-level problem at position x.
Matrix2 magnus_step(double x, double t, double h, const Envelope& env, double omega_hf,
                    double phase_c, double omega_A)
{
    static const double c = std::sqrt(3.0) / 6.0;
    const double t1 = t + h * (0.5 - c);
    const double t2 = t + h * (0.5 + c);
    auto generator = [&](double tt) {
        const Matrix2 hm = -0.5 * omega_hf * pauli::sigma_z() -
                           env(tt) * std::sin(x + phase_c + omega_A * tt) * pauli::sigma_x();
        return Matrix2(cplx(0.0, -1.0) * hm);
    };
    const Matrix2 a1 = generator(t1);
    const Matrix2 a2 = generator(t2);
    const Matrix2 m = 0.5 * h * (a1 + a2) + (std::sqrt(3.0) / 12.0) * h * h * (a2 * a1 - a1 * a2);
    return exp_su2(m);
}

Matrix propagate(int steps, const Envelope& env, const XBasis& xb, const KickPhysics& physics,
                 const IntegratorOptions& opt)
{
    const int n = static_cast<int>(xb.x.size());
    const double h = env.window / steps;
    const double t0 = -0.5 * env.window;
    const Matrix v = xb.v.cast<cplx>();

    if (!opt.include_trap_term) {
        std::vector<Matrix2> blocks(n, Matrix2::Identity());
        for (int k = 0; k < steps; ++k) {
            const double t = t0 + k * h;
            for (int j = 0; j < n; ++j) {
                blocks[j] = magnus_step(xb.x(j), t, h, env, physics.omega_hf,
                                        opt.phase_at_center, opt.omega_A) *
                            blocks[j];
            }
        }
        Matrix u(2 * n, 2 * n);
        for (int r = 0; r < 2; ++r) {
            for (int s = 0; s < 2; ++s) {
                Vector d(n);
                for (int j = 0; j < n; ++j) d(j) = blocks[j](r, s);
                u.block(r * n, s * n, n, n) = v * d.asDiagonal() * v.transpose();
            }
        }
        return u;
    }

    const Vector half = free_motional_phases(physics.omega_t, 0.5 * h, n);
    Matrix u = Matrix::Identity(2 * n, 2 * n);
    auto apply_trap = [&](Matrix& m) {
        for (int r = 0; r < 2; ++r) {
            m.middleRows(r * n, n) = half.asDiagonal() * m.middleRows(r * n, n);
        }
    };
    Matrix w(2 * n, 2 * n);
    for (int k = 0; k < steps; ++k) {
        const double t = t0 + k * h;
        apply_trap(u);
        for (int r = 0; r < 2; ++r) {
            w.middleRows(r * n, n).noalias() = v.transpose() * u.middleRows(r * n, n);
        }
        for (int j = 0; j < n; ++j) {
            const Matrix2 b = magnus_step(xb.x(j), t, h, env, physics.omega_hf,
                                          opt.phase_at_center, opt.omega_A);
            const Eigen::RowVectorXcd lo = w.row(j);
            const Eigen::RowVectorXcd hi = w.row(n + j);
            w.row(j) = b(0, 0) * lo + b(0, 1) * hi;
            w.row(n + j) = b(1, 0) * lo + b(1, 1) * hi;
        }
        for (int r = 0; r < 2; ++r) {
            u.middleRows(r * n, n).noalias() = v * w.middleRows(r * n, n);
        }
        apply_trap(u);
    }
    return u;
}

DenseOperator to_interaction_picture(const Matrix& lab, double window, const KickPhysics& physics,
                                     const HilbertDims& dims, bool with_trap)
{
    DenseOperator free = qubit_phase_evolution(physics.omega_hf, 0.5 * window, dims);
    if (with_trap) free = free * free_motional_evolution(physics.omega_t, 0.5 * window, dims);
    const DenseOperator inv = free.adjoint();
    return inv * DenseOperator(dims, lab) * inv;
}

double delta_flip_probability(double theta, double phase, const XBasis& xb)
{
    double p = 0.0;
    for (int j = 0; j < xb.x.size(); ++j) {
        const double s = std::sin(theta * std::sin(xb.x(j) + phase));
        p += xb.v(0, j) * xb.v(0, j) * s * s;
    }
    return p;
}

} // namespace

PulseIntegration integrate_pulse_hamiltonian(double theta_nominal, double tau, PulseShape shape,
                                             const KickPhysics& physics, const HilbertDims& dims,
                                             const IntegratorOptions& options)
{
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw Error(ErrorKind::InvalidArgument, "pulse duration must be positive", "tau");
    }
    if (!(theta_nominal > 0.0) || !std::isfinite(theta_nominal)) {
        throw Error(ErrorKind::InvalidArgument, "pulse area must be positive", "theta");
    }
    if (options.min_steps < 1 || !(options.max_step_phase > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "invalid step controls", "min_steps");
    }
    const Envelope env = make_envelope(theta_nominal, tau, shape, options.window_fwhm);
    const XBasis xb = position_basis(physics.eta, dims.fock());

    const double fastest = std::max(std::abs(physics.omega_hf), std::abs(env.amplitude));
    const int steps = std::max(
        options.min_steps,
        static_cast<int>(std::ceil(env.window * fastest / options.max_step_phase)));

    const DenseOperator coarse =
        to_interaction_picture(propagate(steps, env, xb, physics, options), env.window, physics,
                               dims, options.include_trap_term);
    DenseOperator fine =
        to_interaction_picture(propagate(2 * steps, env, xb, physics, options), env.window,
                               physics, dims, options.include_trap_term);
    const double err = coarse.max_abs_diff(fine);
    if (err > options.convergence_tol) {
        std::ostringstream msg;
        msg << "step-doubling difference " << err << " exceeds " << options.convergence_tol;
        throw Error(ErrorKind::StepTooCoarse, msg.str(), "steps");
    }

    const auto probe = SpinOscState::basis(dims, Spin::Down, 0);
    const double p_int = fine.apply(probe).spin_population(Spin::Up);
    double theta_eff = std::numeric_limits<double>::quiet_NaN();
    const double phase = options.phase_at_center;
    if (p_int <= delta_flip_probability(kPi / 2.0, phase, xb)) {
        double lo = 0.0;
        double hi = kPi / 2.0;
        for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
            const double mid = 0.5 * (lo + hi);
            (delta_flip_probability(mid, phase, xb) < p_int ? lo : hi) = mid;
        }
        theta_eff = 0.5 * (lo + hi);
    }
    return {std::move(fine), theta_eff, 2 * steps, err};
}

} // namespace sdk
