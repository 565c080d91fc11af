#include "sdk/oscillator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sdk/errors.hpp"

namespace sdk {

HilbertDims::HilbertDims(int fock_cutoff, int guard_margin)
    : fock_(fock_cutoff), margin_(guard_margin)
{
    if (fock_ < 2) {
        throw Error(ErrorKind::CutoffTooSmall, "Fock cutoff must be >= 2", "fock_cutoff");
    }
    if (margin_ < 0) {
        margin_ = std::min(kDefaultMargin, fock_ / 2);
    }
    if (margin_ >= fock_) {
        throw Error(ErrorKind::InvalidArgument, "guard margin must be smaller than the Fock cutoff",
                    "guard_margin");
    }
}

//
// SpinOscState
//

SpinOscState::SpinOscState(HilbertDims dims, Vector amplitudes)
    : dims_(dims), amps_(std::move(amplitudes))
{
    if (amps_.size() != dims_.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "state length does not match 2N");
    }
}

SpinOscState SpinOscState::basis(HilbertDims dims, Spin s, int n)
{
    Vector v = Vector::Zero(dims.dim());
    v(dims.index(s, n)) = 1.0;
    return {dims, std::move(v)};
}

SpinOscState SpinOscState::product(HilbertDims dims, cplx down, cplx up, const Vector& motion)
{
    if (motion.size() != dims.fock()) {
        throw Error(ErrorKind::DimensionMismatch, "motional vector length does not match N");
    }
    Vector v(dims.dim());
    v.head(dims.fock()) = down * motion;
    v.tail(dims.fock()) = up * motion;
    return {dims, std::move(v)};
}

SpinOscState SpinOscState::product(HilbertDims dims, cplx down, cplx up, int fock_level)
{
    Vector motion = Vector::Zero(dims.fock());
    motion(fock_level) = 1.0;
    return product(dims, down, up, motion);
}

Vector SpinOscState::branch(Spin s) const
{
    return amps_.segment(dims_.index(s, 0), dims_.fock());
}

double SpinOscState::spin_population(Spin s) const
{
    return amps_.segment(dims_.index(s, 0), dims_.fock()).squaredNorm();
}

std::vector<double> SpinOscState::fock_populations(Spin s) const
{
    std::vector<double> out(dims_.fock());
    for (int n = 0; n < dims_.fock(); ++n) {
        out[n] = std::norm(amps_(dims_.index(s, n)));
    }
    return out;
}

cplx SpinOscState::mean_lowering() const
{
    cplx acc = 0.0;
    for (Spin s : {Spin::Down, Spin::Up}) {
        for (int n = 1; n < dims_.fock(); ++n) {
            acc += std::conj(amps_(dims_.index(s, n - 1))) * std::sqrt(double(n))
                   * amps_(dims_.index(s, n));
        }
    }
    return acc;
}

void SpinOscState::check_norm(double budget) const
{
    const double norm = norm_squared();
    if (norm < 1.0 - budget || norm > 1.0 + 1e-12) {
        std::ostringstream msg;
        msg << "state norm " << norm << " outside [1 - " << budget << ", 1]";
        throw Error(ErrorKind::NormLoss, msg.str());
    }
}

//
// DenseOperator
//

DenseOperator::DenseOperator(HilbertDims dims, Matrix entries)
    : dims_(dims), m_(std::move(entries))
{
    if (m_.rows() != dims_.dim() || m_.cols() != dims_.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "operator shape does not match 2N x 2N");
    }
}

DenseOperator DenseOperator::identity(HilbertDims dims)
{
    return {dims, Matrix::Identity(dims.dim(), dims.dim())};
}

DenseOperator DenseOperator::kron(HilbertDims dims, const Matrix2& spin, const Matrix& motion)
{
    const int n = dims.fock();
    if (motion.rows() != n || motion.cols() != n) {
        throw Error(ErrorKind::DimensionMismatch, "motional block does not match N x N");
    }
    Matrix m(2 * n, 2 * n);
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            m.block(r * n, c * n, n, n) = spin(r, c) * motion;
        }
    }
    return {dims, std::move(m)};
}

DenseOperator DenseOperator::spin_only(HilbertDims dims, const Matrix2& spin)
{
    const int n = dims.fock();
    Matrix m = Matrix::Zero(2 * n, 2 * n);
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            if (spin(r, c) != cplx(0.0)) {
                m.block(r * n, c * n, n, n).diagonal().setConstant(spin(r, c));
            }
        }
    }
    return {dims, std::move(m)};
}

DenseOperator DenseOperator::motion_only(HilbertDims dims, const Matrix& motion)
{
    return kron(dims, pauli::identity(), motion);
}

DenseOperator DenseOperator::operator*(const DenseOperator& rhs) const
{
    if (!(dims_ == rhs.dims_)) {
        throw Error(ErrorKind::DimensionMismatch, "operator dimensions differ");
    }
    Matrix product = m_ * rhs.m_;
    return {dims_, std::move(product)};
}

SpinOscState DenseOperator::apply(const SpinOscState& state) const
{
    if (!(dims_ == state.dims())) {
        throw Error(ErrorKind::DimensionMismatch, "operator and state dimensions differ");
    }
    Vector out = m_ * state.amplitudes();
    return {dims_, std::move(out)};
}

namespace {

std::vector<int> invariant_indices(const HilbertDims& dims, int levels)
{
    if (levels < 0) {
        levels = dims.invariant_levels();
    }
    levels = std::min(levels, dims.fock());
    std::vector<int> idx;
    idx.reserve(2 * levels);
    for (Spin s : {Spin::Down, Spin::Up}) {
        for (int n = 0; n < levels; ++n) {
            idx.push_back(dims.index(s, n));
        }
    }
    return idx;
}

} // namespace

double DenseOperator::unitarity_defect(int levels) const
{
    const auto idx = invariant_indices(dims_, levels);
    Matrix cols = m_(Eigen::all, idx);
    Matrix gram = cols.adjoint() * cols;
    gram -= Matrix::Identity(gram.rows(), gram.cols());
    return gram.cwiseAbs().maxCoeff();
}

double DenseOperator::max_abs_diff(const DenseOperator& other, int levels) const
{
    if (!(dims_ == other.dims_)) {
        throw Error(ErrorKind::DimensionMismatch, "operator dimensions differ");
    }
    const auto idx = invariant_indices(dims_, levels);
    return (m_(idx, idx) - other.m_(idx, idx)).cwiseAbs().maxCoeff();
}

PhaseAlignedDiff compare_up_to_global_phase(const DenseOperator& a, const DenseOperator& b,
                                            int levels)
{
    if (!(a.dims() == b.dims())) {
        throw Error(ErrorKind::DimensionMismatch, "operator dimensions differ");
    }
    const auto idx = invariant_indices(a.dims(), levels);
    Matrix blk_a = a.matrix()(idx, idx);
    Matrix blk_b = b.matrix()(idx, idx);
    const cplx inner = (blk_b.conjugate().cwiseProduct(blk_a)).sum();
    const double chi = std::abs(inner) > 0.0 ? std::arg(inner) : 0.0;
    const double diff = (blk_a - std::polar(1.0, chi) * blk_b).cwiseAbs().maxCoeff();
    return {diff, chi};
}

//
// Pauli matrices in (down, up) order
//

namespace pauli {

Matrix2 identity()
{
    return Matrix2::Identity();
}

Matrix2 sigma_x()
{
    Matrix2 m;
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

Matrix2 sigma_y()
{
    Matrix2 m;
    m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
    return m;
}

Matrix2 sigma_z()
{
    Matrix2 m;
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

Matrix2 raise()
{
    Matrix2 m = Matrix2::Zero();
    m(1, 0) = 1.0;
    return m;
}

Matrix2 lower()
{
    Matrix2 m = Matrix2::Zero();
    m(0, 1) = 1.0;
    return m;
}

} // namespace pauli

//
// Displacement
//

Matrix displacement_matrix(cplx alpha, int fock_levels)
{
    const int n_levels = fock_levels;
    const double x = std::norm(alpha);
    if (x > n_levels / 4.0) {
        std::ostringstream msg;
        msg << "|alpha|^2 = " << x << " exceeds N/4 = " << n_levels / 4.0;
        throw Error(ErrorKind::CutoffTooSmall, msg.str());
    }
    if (x == 0.0) {
        return Matrix::Identity(n_levels, n_levels);
    }

    // Along each diagonal k = m - n the scaled Laguerre values
    //   M_j = sqrt(j!/(j+k)!) |alpha|^k e^{-x/2} L_j^{(k)}(x)
    // obey a three-term recurrence whose terms stay bounded by 1.
    Matrix d = Matrix::Zero(n_levels, n_levels);
    const double log_abs = std::log(std::sqrt(x));
    const double arg = std::arg(alpha);
    std::vector<double> diag(n_levels);
    for (int k = 0; k < n_levels; ++k) {
        const int len = n_levels - k;
        diag[0] = std::exp(k * log_abs - 0.5 * std::lgamma(k + 1.0) - 0.5 * x);
        for (int j = 0; j + 1 < len; ++j) {
            const double prev = j > 0 ? diag[j - 1] : 0.0;
            diag[j + 1] = ((2.0 * j + 1.0 + k - x) * diag[j] - std::sqrt(double(j) * (j + k)) * prev)
                          / std::sqrt((j + 1.0) * (j + 1.0 + k));
        }
        const cplx upper_phase = std::polar(1.0, k * arg);       // alpha^k / |alpha|^k
        const cplx lower_phase = std::polar(1.0, k * (kPi - arg)); // (-alpha*)^k / |alpha|^k
        for (int j = 0; j < len; ++j) {
            if (!std::isfinite(diag[j])) {
                throw Error(ErrorKind::NumericOverflow, "displacement matrix element overflowed");
            }
            d(j + k, j) = diag[j] * upper_phase;
            if (k > 0) {
                d(j, j + k) = diag[j] * lower_phase;
            }
        }
    }
    return d;
}

DenseOperator displacement_operator(cplx alpha, const HilbertDims& dims)
{
    return DenseOperator::motion_only(dims, displacement_matrix(alpha, dims.fock()));
}

int displacement_safe_levels(double max_alpha, int fock_levels, double leak)
{
    const double a = std::abs(max_alpha);
    if (a == 0.0) return fock_levels;
    // Rows beyond the padded size carry far less than `leak`.
    const int pad = static_cast<int>(std::ceil(4.0 * a * std::sqrt(fock_levels) + a * a)) + 64;
    const Matrix d = displacement_matrix(a, fock_levels + pad);
    for (int n = 0; n < fock_levels; ++n) {
        if (d.col(n).tail(pad).squaredNorm() > leak) return n;
    }
    return fock_levels;
}

Vector free_motional_phases(double omega_t, double duration, int fock_levels)
{
    if (duration < 0.0) {
        throw Error(ErrorKind::InvalidArgument, "free evolution duration must be >= 0", "T");
    }
    const double step = std::remainder(omega_t * duration, kTwoPi);
    Vector phases(fock_levels);
    for (int n = 0; n < fock_levels; ++n) {
        phases(n) = std::polar(1.0, -std::remainder(n * step, kTwoPi));
    }
    return phases;
}

DenseOperator free_motional_evolution(double omega_t, double duration, const HilbertDims& dims)
{
    Matrix motion = free_motional_phases(omega_t, duration, dims.fock()).asDiagonal();
    return DenseOperator::motion_only(dims, motion);
}

Matrix2 qubit_phase_matrix(double omega_hf, double duration)
{
    if (duration < 0.0) {
        throw Error(ErrorKind::InvalidArgument, "qubit evolution duration must be >= 0", "T");
    }
    const double half = 0.5 * std::remainder(omega_hf * duration, 2.0 * kTwoPi);
    Matrix2 m = Matrix2::Zero();
    m(0, 0) = std::polar(1.0, half);
    m(1, 1) = std::polar(1.0, -half);
    return m;
}

DenseOperator qubit_phase_evolution(double omega_hf, double duration, const HilbertDims& dims)
{
    return DenseOperator::spin_only(dims, qubit_phase_matrix(omega_hf, duration));
}

//
// Thermal ensembles
//

ThermalEnsemble thermal_weights(double n_bar, int levels, double budget)
{
    if (!(n_bar >= 0.0)) {
        throw Error(ErrorKind::RangeError, "mean phonon number must be >= 0", "n_bar");
    }
    ThermalEnsemble ens;
    ens.n_bar = n_bar;
    ens.weights.resize(levels);
    const double ratio = n_bar / (n_bar + 1.0);
    ens.tail_mass = std::pow(ratio, levels);
    if (ens.tail_mass > budget) {
        std::ostringstream msg;
        msg << "thermal tail mass " << ens.tail_mass << " beyond " << levels
            << " levels exceeds budget " << budget;
        throw Error(ErrorKind::CutoffTooSmall, msg.str(), "fock_cutoff");
    }
    double sum = 0.0;
    for (int n = 0; n < levels; ++n) {
        ens.weights[n] = std::pow(ratio, n);
        sum += ens.weights[n];
    }
    for (double& w : ens.weights) {
        w /= sum;
    }
    return ens;
}

ThermalEnsemble thermal_weights(double n_bar, const HilbertDims& dims, double budget)
{
    return thermal_weights(n_bar, dims.fock(), budget);
}

cplx overlap(const SpinOscState& a, const SpinOscState& b)
{
    if (!(a.dims() == b.dims())) {
        throw Error(ErrorKind::DimensionMismatch, "state dimensions differ");
    }
    return a.amplitudes().dot(b.amplitudes());
}

} // namespace sdk
