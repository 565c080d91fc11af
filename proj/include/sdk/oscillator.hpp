#pragma once

// Truncated spin-1/2 (x) harmonic-oscillator Hilbert space.
//
// Basis ordering is fixed for the whole library: the spin index is the slow
// (outer) index and the Fock index the fast (inner) one, so the amplitude of
// |s>|n> lives at s * N + n with s = 0 for |down> and s = 1 for |up>.
// Pauli matrices are written in that (down, up) order, so sigma_z = diag(+1, -1).

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sdk {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Matrix2 = Eigen::Matrix2cd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kDefaultTruncationBudget = 1e-8;
inline constexpr double kUnitarityTolerance = 1e-6;

enum class Spin : int { Down = 0, Up = 1 };

class HilbertDims {
public:
    static constexpr int kDefaultMargin = 16;

    // margin < 0 selects the default guard margin, min(16, N / 2).
    explicit HilbertDims(int fock_cutoff, int guard_margin = -1);

    int fock() const noexcept { return fock_; }
    int dim() const noexcept { return 2 * fock_; }
    int margin() const noexcept { return margin_; }
    // Fock levels 0 .. invariant_levels() - 1 are far enough from the cutoff
    // for unitarity checks to be meaningful.
    int invariant_levels() const noexcept { return fock_ - margin_; }
    int index(Spin s, int n) const noexcept { return static_cast<int>(s) * fock_ + n; }

    bool operator==(const HilbertDims& other) const noexcept
    {
        return fock_ == other.fock_ && margin_ == other.margin_;
    }

private:
    int fock_;
    int margin_;
};

class SpinOscState {
public:
    SpinOscState(HilbertDims dims, Vector amplitudes);

    static SpinOscState basis(HilbertDims dims, Spin s, int n);
    // (down |motion> + up |motion>) for a given motional vector of length N.
    static SpinOscState product(HilbertDims dims, cplx down, cplx up, const Vector& motion);
    static SpinOscState product(HilbertDims dims, cplx down, cplx up, int fock_level);

    const HilbertDims& dims() const noexcept { return dims_; }
    const Vector& amplitudes() const noexcept { return amps_; }

    double norm_squared() const { return amps_.squaredNorm(); }
    // Motional amplitudes of one spin branch.
    Vector branch(Spin s) const;
    double spin_population(Spin s) const;
    std::vector<double> fock_populations(Spin s) const;
    // <a> on the motional mode, summed over both spin branches.
    cplx mean_lowering() const;

    // Throws NormLoss when the squared norm left [1 - budget, 1 + 1e-12].
    void check_norm(double budget = kDefaultTruncationBudget) const;

private:
    HilbertDims dims_;
    Vector amps_;
};

class DenseOperator {
public:
    DenseOperator(HilbertDims dims, Matrix entries);

    static DenseOperator identity(HilbertDims dims);
    // spin (x) motion with the library basis ordering.
    static DenseOperator kron(HilbertDims dims, const Matrix2& spin, const Matrix& motion);
    static DenseOperator spin_only(HilbertDims dims, const Matrix2& spin);
    static DenseOperator motion_only(HilbertDims dims, const Matrix& motion);

    const HilbertDims& dims() const noexcept { return dims_; }
    const Matrix& matrix() const noexcept { return m_; }

    DenseOperator adjoint() const { return {dims_, m_.adjoint()}; }
    DenseOperator operator*(const DenseOperator& rhs) const;
    SpinOscState apply(const SpinOscState& state) const;

    // Max |U^dag U - I| over columns with Fock index below `levels`
    // (invariant_levels() when levels < 0).
    double unitarity_defect(int levels = -1) const;
    // Max |A - B| restricted to the invariant block (levels below `levels`, or
    // invariant_levels() when levels < 0).
    double max_abs_diff(const DenseOperator& other, int levels = -1) const;

private:
    HilbertDims dims_;
    Matrix m_;
};

struct PhaseAlignedDiff {
    double max_abs_diff;
    double global_phase;
};

// Compares a and e^{i chi} b on the invariant block, with chi taken from the
// Frobenius overlap of the two blocks.
PhaseAlignedDiff compare_up_to_global_phase(const DenseOperator& a, const DenseOperator& b,
                                            int levels = -1);

namespace pauli {
Matrix2 identity();
Matrix2 sigma_x();
Matrix2 sigma_y();
Matrix2 sigma_z();
// |up><down|
Matrix2 raise();
// |down><up|
Matrix2 lower();
} // namespace pauli

// Motional displacement D(alpha) on Fock levels 0..n-1, from the stable
// three-term recurrence for the Laguerre closed form. Guard: |alpha|^2 <= n / 4.
Matrix displacement_matrix(cplx alpha, int fock_levels);

DenseOperator displacement_operator(cplx alpha, const HilbertDims& dims);

// Number of low Fock levels n for which D(alpha)|n>, |alpha| <= max_alpha,
// leaks at most `leak` of its norm past the cutoff. Products of operators
// built from such displacements are exact on these levels to about
// sqrt(leak); the fixed guard margin alone does not guarantee that for
// large displacements.
int displacement_safe_levels(double max_alpha, int fock_levels, double leak = 1e-16);

// exp(-i n omega_t T) on Fock level n, identity on spin.
DenseOperator free_motional_evolution(double omega_t, double duration, const HilbertDims& dims);
Vector free_motional_phases(double omega_t, double duration, int fock_levels);

// exp(+(i/2) omega_hf T sigma_z), identity on motion.
DenseOperator qubit_phase_evolution(double omega_hf, double duration, const HilbertDims& dims);
Matrix2 qubit_phase_matrix(double omega_hf, double duration);

struct ThermalEnsemble {
    double n_bar = 0.0;
    std::vector<double> weights;
    // Probability mass beyond the truncation before renormalization.
    double tail_mass = 0.0;
};

ThermalEnsemble thermal_weights(double n_bar, const HilbertDims& dims,
                                double budget = kDefaultTruncationBudget);
// Same law over an explicit number of levels.
ThermalEnsemble thermal_weights(double n_bar, int levels, double budget = kDefaultTruncationBudget);

cplx overlap(const SpinOscState& a, const SpinOscState& b);

} // namespace sdk
