#include <cmath>
#include <random>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "sdk/errors.hpp"
#include "sdk/oscillator.hpp"

using namespace sdk;

namespace {

// exp(alpha a^dag - alpha* a) on an enlarged space, cropped to n levels.
Matrix displacement_by_expm(cplx alpha, int n, int pad = 80)
{
    const int big = n + pad;
    Matrix a = Matrix::Zero(big, big);
    for (int k = 1; k < big; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    const Matrix gen = alpha * a.adjoint() - std::conj(alpha) * a;
    const Matrix full = gen.exp();
    return full.topLeftCorner(n, n);
}

template <class F>
void expect_error(ErrorKind kind, F&& f)
{
    try {
        f();
        ADD_FAILURE() << "no error raised";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), kind) << e.what();
    }
}

} // namespace

TEST(HilbertDims, DefaultMarginAndIndexing)
{
    const HilbertDims d(256);
    EXPECT_EQ(d.margin(), 16);
    EXPECT_EQ(d.invariant_levels(), 240);
    EXPECT_EQ(d.dim(), 512);
    EXPECT_EQ(d.index(Spin::Down, 3), 3);
    EXPECT_EQ(d.index(Spin::Up, 3), 259);
    EXPECT_EQ(HilbertDims(8).margin(), 4);
}

TEST(Displacement, ZeroIsIdentity)
{
    const Matrix d = displacement_matrix(0.0, 64);
    EXPECT_LT((d - Matrix::Identity(64, 64)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Displacement, VacuumOverlap)
{
    const cplx alpha(0.0, 0.22);
    const Matrix d = displacement_matrix(alpha, 64);
    // <0|D|0> = e^{-|alpha|^2/2} from the coherent-state series.
    double series = 0.0;
    double term = 1.0;
    for (int n = 0; n < 40; ++n) {
        series += term;
        term *= -0.5 * std::norm(alpha) / (n + 1);
    }
    EXPECT_NEAR(d(0, 0).real(), series, 1e-14);
    EXPECT_NEAR(std::abs(d(0, 0)), 0.97609, 5e-6);
    EXPECT_NEAR(d(0, 0).imag(), 0.0, 1e-15);
}

TEST(Displacement, MatchesMatrixExponential)
{
    for (cplx alpha : {cplx(0.22, 0.0), cplx(0.0, 0.66), cplx(0.5, 0.3), cplx(-1.1, 0.7)}) {
        const int n = 96;
        const Matrix ours = displacement_matrix(alpha, n);
        const Matrix ref = displacement_by_expm(alpha, n);
        // Elements near the cutoff differ because the exponential of a
        // truncated generator is not the truncated exponential.
        const int keep = 64;
        EXPECT_LT((ours - ref).topLeftCorner(keep, keep).cwiseAbs().maxCoeff(), 1e-10)
            << alpha;
    }
}

TEST(Displacement, GroupInverse)
{
    const HilbertDims dims(128);
    const cplx alpha(0.5, 0.3);
    const DenseOperator p = displacement_operator(alpha, dims) * displacement_operator(-alpha, dims);
    // Products are exact only where the intermediate states fit below the cutoff.
    const int levels = displacement_safe_levels(std::abs(alpha), dims.fock());
    EXPECT_GE(levels, 80);
    EXPECT_LT(p.max_abs_diff(DenseOperator::identity(dims), levels), 1e-8);
}

TEST(Displacement, CompositionLaw)
{
    const HilbertDims dims(128);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> r(0.0, 1.0), ang(0.0, kTwoPi);
    const int levels = displacement_safe_levels(2.0, dims.fock());
    EXPECT_GE(levels, 48);
    for (int trial = 0; trial < 6; ++trial) {
        const cplx a = std::polar(r(rng), ang(rng));
        const cplx b = std::polar(r(rng), ang(rng));
        const DenseOperator lhs = displacement_operator(a, dims) * displacement_operator(b, dims);
        const double phase = std::imag(a * std::conj(b));
        const Matrix rhs = std::exp(cplx(0.0, phase)) * displacement_operator(a + b, dims).matrix();
        EXPECT_LT(lhs.max_abs_diff(DenseOperator(dims, rhs), levels), 1e-7);
    }
}

TEST(Displacement, UnitaryOnInvariantBlock)
{
    const HilbertDims dims(256);
    for (cplx alpha : {cplx(0.0, 0.22), cplx(0.0, 1.76), cplx(2.0, -3.0)}) {
        const int levels = displacement_safe_levels(std::abs(alpha), dims.fock(), 1e-12);
        EXPECT_GE(levels, 128) << alpha;
        EXPECT_LE(displacement_operator(alpha, dims).unitarity_defect(levels), kUnitarityTolerance);
    }
}

TEST(Displacement, SafeLevelsShrinkWithDisplacement)
{
    EXPECT_EQ(displacement_safe_levels(0.0, 64), 64);
    const int small = displacement_safe_levels(0.22, 256);
    const int large = displacement_safe_levels(3.0, 256);
    EXPECT_GE(small, 224);
    EXPECT_LT(large, small);
    // Leak just past the returned level exceeds the threshold, just inside it does not.
    const Matrix d = displacement_matrix(3.0, 512);
    EXPECT_LE(d.col(large - 1).segment(256, 256).squaredNorm(), 1e-16);
    EXPECT_GT(d.col(large).segment(256, 256).squaredNorm(), 1e-16);
}

TEST(Displacement, LargeCutoffStaysFinite)
{
    const Matrix d = displacement_matrix(cplx(0.0, 7.0), 512);
    EXPECT_TRUE(d.allFinite());
}

TEST(Displacement, GuardRaisesCutoffTooSmall)
{
    expect_error(ErrorKind::CutoffTooSmall, [] { displacement_matrix(cplx(3.0, 0.0), 32); });
}

TEST(FreeEvolution, PeriodsAndComposition)
{
    const HilbertDims dims(64);
    const double w = kTwoPi * 743e3;
    const DenseOperator id = DenseOperator::identity(dims);
    EXPECT_LT(free_motional_evolution(w, 0.0, dims).max_abs_diff(id), 1e-15);
    EXPECT_LT(free_motional_evolution(w, kTwoPi / w, dims).max_abs_diff(id, 64), 1e-12);

    const DenseOperator half = free_motional_evolution(w, kPi / w, dims);
    for (int n = 0; n < 64; ++n) {
        EXPECT_NEAR(half.matrix()(n, n).real(), n % 2 ? -1.0 : 1.0, 1e-12);
    }

    const double t1 = 0.3e-6, t2 = 0.71e-6;
    const DenseOperator ab =
        free_motional_evolution(w, t1, dims) * free_motional_evolution(w, t2, dims);
    EXPECT_LT(ab.max_abs_diff(free_motional_evolution(w, t1 + t2, dims), 64), 1e-12);
}

TEST(QubitPhase, Examples)
{
    const HilbertDims dims(8);
    const double w = kTwoPi * 12.642815e9;
    EXPECT_LT(qubit_phase_evolution(w, 0.0, dims).max_abs_diff(DenseOperator::identity(dims)),
              1e-15);

    const DenseOperator full = qubit_phase_evolution(w, kTwoPi / w, dims);
    EXPECT_LT(full.max_abs_diff(DenseOperator(dims, -Matrix::Identity(16, 16)), 8), 1e-12);
    EXPECT_LT(compare_up_to_global_phase(full, DenseOperator::identity(dims), 8).max_abs_diff,
              1e-12);

    const Matrix2 q = qubit_phase_matrix(w, kPi / w);
    EXPECT_LT(std::abs(q(0, 0) - std::exp(cplx(0, kPi / 2))), 1e-12);
    EXPECT_LT(std::abs(q(1, 1) - std::exp(cplx(0, -kPi / 2))), 1e-12);
    EXPECT_EQ(q(0, 1), cplx(0.0));
}

TEST(Thermal, GroundStateAndNormalization)
{
    const ThermalEnsemble z = thermal_weights(0.0, HilbertDims(32));
    EXPECT_EQ(z.weights[0], 1.0);
    for (std::size_t n = 1; n < z.weights.size(); ++n) EXPECT_EQ(z.weights[n], 0.0);

    const ThermalEnsemble t = thermal_weights(10.1, HilbertDims(256));
    double sum = 0.0;
    for (double w : t.weights) sum += w;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_NEAR(t.weights[1] / t.weights[0], 10.1 / 11.1, 1e-14);
    EXPECT_NEAR(t.weights[1] / t.weights[0], 0.90991, 5e-6);
}

TEST(Thermal, MatchesBoltzmannFactors)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 20.0);
    for (int trial = 0; trial < 10; ++trial) {
        const double nb = u(rng);
        const int levels = 600;
        const ThermalEnsemble t = thermal_weights(nb, levels);
        // p_n = (1 - e^{-x}) e^{-n x} with e^{-x} = nb / (nb + 1).
        const double x = std::log1p(1.0 / std::max(nb, 1e-300));
        for (int n = 0; n < levels; n += 7) {
            const double p = -std::expm1(-x) * std::exp(-n * x);
            EXPECT_NEAR(t.weights[n], p, 1e-12) << "n_bar=" << nb << " n=" << n;
        }
    }
}

TEST(Thermal, Errors)
{
    expect_error(ErrorKind::CutoffTooSmall, [] { thermal_weights(10.1, HilbertDims(64)); });
    try {
        thermal_weights(-1.0, HilbertDims(64));
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::RangeError);
        EXPECT_EQ(e.key(), "n_bar");
    }
}

TEST(Overlap, Examples)
{
    const HilbertDims dims(64);
    const SpinOscState a = SpinOscState::basis(dims, Spin::Down, 0);
    EXPECT_NEAR(std::abs(overlap(a, a)), 1.0, 1e-15);
    EXPECT_EQ(overlap(a, SpinOscState::basis(dims, Spin::Up, 0)), cplx(0.0));
    EXPECT_EQ(overlap(a, SpinOscState::basis(dims, Spin::Down, 1)), cplx(0.0));

    const SpinOscState d = displacement_operator(cplx(0, 0.22), dims).apply(a);
    EXPECT_NEAR(overlap(a, d).real(), std::exp(-0.5 * 0.22 * 0.22), 1e-14);
    EXPECT_LE(std::abs(overlap(d, d)), 1.0 + 1e-12);

    expect_error(ErrorKind::DimensionMismatch,
                 [&] { overlap(a, SpinOscState::basis(HilbertDims(32), Spin::Down, 0)); });
}

TEST(State, NormNeverGrows)
{
    const HilbertDims dims(64);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    Vector v(dims.dim());
    for (int i = 0; i < dims.dim(); ++i) v(i) = cplx(g(rng), g(rng));
    v.normalize();
    const SpinOscState psi(dims, v);
    // Displacement pushes population past the cutoff; truncation can only lose norm.
    for (cplx alpha : {cplx(0.0, 0.22), cplx(1.5, -0.5), cplx(3.5, 1.0)}) {
        EXPECT_LE(displacement_operator(alpha, dims).apply(psi).norm_squared(), 1.0 + 1e-12);
    }
    EXPECT_LE(free_motional_evolution(1.0, 0.7, dims).apply(psi).norm_squared(), 1.0 + 1e-12);
    EXPECT_LE(qubit_phase_evolution(1.0, 0.7, dims).apply(psi).norm_squared(), 1.0 + 1e-12);
}

TEST(State, CheckNormRaisesNormLoss)
{
    const HilbertDims dims(16);
    Vector v = Vector::Zero(dims.dim());
    v(0) = 0.999;
    expect_error(ErrorKind::NormLoss, [&] { SpinOscState(dims, v).check_norm(); });
    EXPECT_NO_THROW(SpinOscState::basis(dims, Spin::Up, 2).check_norm());
}

TEST(Operator, DimensionMismatch)
{
    expect_error(ErrorKind::DimensionMismatch, [] {
        DenseOperator::identity(HilbertDims(8)) * DenseOperator::identity(HilbertDims(16));
    });
}

TEST(CompareUpToGlobalPhase, RecoversPhase)
{
    const HilbertDims dims(32);
    const DenseOperator d = displacement_operator(cplx(0.3, 0.1), dims);
    const DenseOperator e(dims, std::exp(cplx(0, 1.1)) * d.matrix());
    const PhaseAlignedDiff r = compare_up_to_global_phase(e, d);
    EXPECT_LT(r.max_abs_diff, 1e-12);
    EXPECT_NEAR(std::remainder(r.global_phase - 1.1, kTwoPi), 0.0, 1e-12);
}
