#include "test_support.hpp"

#include <cmath>

using namespace oneill;
using namespace oneill::testing;

namespace {

Vec combine(const Vec& a, double s, const Vec& b)
{
    Vec out(a.size());
    for (int i = 0; i < a.size(); ++i) out[i] = a[i] + s * b[i];
    return out;
}

double frame_norm2(const SubmersionPoint& sp, const Vec& v) { return std::pow(sp.frame_norm(v), 2); }

std::vector<std::string> umbilic_ids()
{
    std::vector<std::string> out;
    for (const auto& e : catalog())
        if (e.has_tag("umbilic")) out.push_back(e.id);
    return out;
}

} // namespace

TEST(Frame, FlatTorusLegs)
{
    const auto& sub = catalog_sub("lorentz-flat-torus");
    const AdaptedFrame fr = adapted_frame(sub, vec({0.4, 2.0}));
    ASSERT_EQ(fr.r, 1);
    ASSERT_EQ(fr.n, 1);
    // Vertical leg ∂φ with ε = −1, horizontal leg ∂θ with ε = +1, up to sign.
    EXPECT_NEAR(std::abs(fr.legs[0][1]), 1.0, 1e-15);
    EXPECT_NEAR(fr.legs[0][0], 0.0, 1e-15);
    EXPECT_EQ(fr.eps[0], -1);
    EXPECT_NEAR(std::abs(fr.legs[1][0]), 1.0, 1e-15);
    EXPECT_NEAR(fr.legs[1][1], 0.0, 1e-15);
    EXPECT_EQ(fr.eps[1], 1);
}

TEST(Frame, WarpedLegsScaleWithWarp)
{
    const auto& sub = catalog_sub("warped-lorentz-t3");
    const double th = 1.1;
    const AdaptedFrame fr = adapted_frame(sub, vec({th, 0.2, 0.3}));
    const double f = 2 + std::cos(th);
    ASSERT_EQ(fr.r, 2);
    for (int i = 0; i < 2; ++i) {
        EXPECT_EQ(fr.eps[i], -1);
        EXPECT_NEAR(fr.legs[i][0], 0.0, 1e-14);
        EXPECT_NEAR(std::hypot(fr.legs[i][1], fr.legs[i][2]), 1.0 / f, 1e-14);
    }
    EXPECT_EQ(fr.eps[2], 1);
}

TEST(Frame, ResidualsOnCatalog)
{
    for (const auto& entry : catalog()) {
        const LoadedCase lc = parse_case(entry);
        const SubmersionSpec& sub = *lc.submersion;
        SampleRng rng(21, "frame_" + entry.id, 0);
        for (int k = 0; k < 20; ++k) {
            const Vec x = random_point(*sub.total, rng);
            const AdaptedFrame fr = adapted_frame(sub, x);
            const FrameResiduals res = frame_residuals(sub, x, fr);
            EXPECT_LE(res.orthonormality, 1e-10) << entry.id;
            EXPECT_LE(res.verticality, 1e-10) << entry.id;
            EXPECT_LE(res.horizontal_isometry, 1e-10) << entry.id;
            int neg = 0;
            for (int e : fr.eps) neg += e < 0;
            EXPECT_EQ(neg, sub.total->signature) << entry.id;
        }
    }
}

TEST(Lift, HorizontalAndProjectsBack)
{
    for (const char* id : {"hopf", "warped-lorentz-t3", "clairaut-cosh"}) {
        const auto& sub = catalog_sub(id);
        SampleRng rng(22, std::string("lift_") + id, 0);
        for (int k = 0; k < 10; ++k) {
            const SubmersionPoint sp(sub, random_point(*sub.total, rng));
            const Vec w = rng.vector(sub.base->dim);
            const Vec X = sp.lift(w);
            const Vec back = sp.dpi(X);
            for (int a = 0; a < sub.base->dim; ++a) EXPECT_NEAR(back[a], w[a], 1e-12) << id;
            EXPECT_LE(sp.frame_norm(sp.vertical(X)), 1e-12) << id;
        }
    }
}

TEST(Lift, PointOverBasePoint)
{
    const auto& sub = catalog_sub("hopf");
    SampleRng rng(23, "lift_point", 0);
    for (int k = 0; k < 10; ++k) {
        const Vec y = random_point(*sub.base, rng);
        const Vec x = lift_point(sub, y);
        EXPECT_LE(max_abs(sub.base->difference(sub.project(x), y)), 1e-10);
    }
}

TEST(Tensors, FlatTorusVanish)
{
    const auto& sub = catalog_sub("lorentz-flat-torus");
    const SubmersionPoint sp(sub, vec({1.0, 2.0}));
    EXPECT_LE(max_abs(sp.H()), 1e-15);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            EXPECT_LE(max_abs(sp.T(sp.leg(a), sp.leg(b))), 1e-15);
            EXPECT_LE(max_abs(sp.A(sp.leg(a), sp.leg(b))), 1e-15);
        }
}

TEST(Tensors, HopfIsTotallyGeodesicWithUnitA)
{
    const auto& sub = catalog_sub("hopf");
    SampleRng rng(24, "hopf_A", 0);
    for (int k = 0; k < 20; ++k) {
        const SubmersionPoint sp(sub, random_point(*sub.total, rng));
        ASSERT_EQ(sp.fibre_dim(), 1);
        const Vec& U = sp.leg(0);
        const Vec& X = sp.leg(1);
        const Vec& Y = sp.leg(2);
        EXPECT_LE(max_abs(sp.H()), 1e-12);
        for (int a = 0; a < 3; ++a) EXPECT_LE(sp.frame_norm(sp.T(U, sp.leg(a))), 1e-12);
        // K' = K + 3|A_X Y|² with K = 1 and K' = 4.
        EXPECT_NEAR(sp.g(sp.A(X, Y), sp.A(X, Y)), 1.0, 1e-10);
        EXPECT_NEAR(sp.g(sp.A(X, U), sp.A(X, U)), 1.0, 1e-10);
        EXPECT_NEAR(sp.normA2(), 2.0, 1e-10);
    }
}

TEST(Umbilicity, ResidualSeparatesCatalog)
{
    for (const auto& entry : catalog()) {
        const LoadedCase lc = parse_case(entry);
        const SubmersionSpec& sub = *lc.submersion;
        SampleRng rng(25, "umbilic_" + entry.id, 0);
        double worst = 0.0;
        for (int k = 0; k < 20; ++k)
            worst = std::max(worst, SubmersionPoint(sub, random_point(*sub.total, rng)).umbilicity_residual());
        if (entry.has_tag("umbilic"))
            EXPECT_LE(worst, 1e-10) << entry.id;
        else
            EXPECT_GT(worst, 1e-3) << entry.id;
    }
}

TEST(Basic, LiftsAndMeanCurvatureAreBasic)
{
    const auto& sub = catalog_sub("warped-lorentz-t3");
    SampleRng rng(26, "basic", 0);
    for (int k = 0; k < 5; ++k) {
        const Vec x = random_point(*sub.total, rng);
        const auto samples = fibre_samples(sub, x);
        const auto lift_dtheta = [&](const Vec& p) { return SubmersionPoint(sub, p).lift(vec({1.0})); };
        const auto mean_curv = [&](const Vec& p) { return SubmersionPoint(sub, p).H(); };
        const auto not_basic = [&](const Vec& p) { return vec({p[1], 0.0, 0.0}); };
        EXPECT_LE(basicness_residual(sub, lift_dtheta, samples), 1e-12);
        EXPECT_LE(basicness_residual(sub, mean_curv, samples), 1e-12);
        EXPECT_GT(basicness_residual(sub, not_basic, samples), 1e-3);
    }
}

TEST(Basic, SamplesMustShareAFibre)
{
    const auto& sub = catalog_sub("warped-lorentz-t3");
    const std::vector<Vec> samples = {vec({0.1, 0.0, 0.0}), vec({0.5, 0.0, 0.0})};
    EXPECT_THROW(basicness_residual(sub, [](const Vec& p) { return p; }, samples), std::invalid_argument);
}

TEST(Basic, FibreSamplesStayOnFibre)
{
    const auto& sub = catalog_sub("hopf");
    const Vec x = vec({0.6, 1.0, 2.0});
    const auto samples = fibre_samples(sub, x);
    ASSERT_GE(samples.size(), 2u);
    for (const Vec& p : samples) EXPECT_LE(max_abs(sub.base->difference(sub.project(p), sub.project(x))), 1e-8);
}

// g(T,T) = g(H,H)/r holds exactly when the fibres are totally umbilic.
TEST(Invariants, NormTMatchesMeanCurvatureOnUmbilicEntries)
{
    for (const auto& id : umbilic_ids()) {
        const auto& sub = catalog_sub(id);
        SampleRng rng(27, "normT_" + id, 0);
        for (int k = 0; k < 10; ++k) {
            const SubmersionPoint sp(sub, random_point(*sub.total, rng));
            const double lhs = sp.normT2();
            const double rhs = sp.g(sp.H(), sp.H()) / sp.fibre_dim();
            EXPECT_NEAR(lhs, rhs, 1e-10 * (1 + std::abs(lhs))) << id;
        }
    }
}

TEST(Invariants, AlgebraicSymmetriesOnCatalog)
{
    for (const auto& entry : catalog()) {
        const LoadedCase lc = parse_case(entry);
        const SubmersionSpec& sub = *lc.submersion;
        const int m = sub.total->dim;
        SampleRng rng(28, "sym_" + entry.id, 0);
        for (int k = 0; k < 10; ++k) {
            const SubmersionPoint sp(sub, random_point(*sub.total, rng));
            const Vec E1 = rng.vector(m), E2 = rng.vector(m), E3 = rng.vector(m);
            const Vec U = sp.vertical(E1), V = sp.vertical(E2);
            const Vec X = sp.horizontal(E1), Y = sp.horizontal(E2);
            const double scale = 1 + frame_norm2(sp, E1) + frame_norm2(sp, E2);
            const double tol = 1e-10 * scale;
            // A_X Y = −A_Y X and T_U V = T_V U
            EXPECT_LE(sp.frame_norm(combine(sp.A(X, Y), 1.0, sp.A(Y, X))), tol) << entry.id;
            EXPECT_LE(sp.frame_norm(combine(sp.T(U, V), -1.0, sp.T(V, U))), tol) << entry.id;
            // T_E and A_E are skew-adjoint.
            for (const Vec& E : {E1, E2, E3}) {
                EXPECT_NEAR(sp.g(sp.T(E, E2), E3), -sp.g(E2, sp.T(E, E3)), tol * (1 + frame_norm2(sp, E3)))
                    << entry.id;
                EXPECT_NEAR(sp.g(sp.A(E, E2), E3), -sp.g(E2, sp.A(E, E3)), tol * (1 + frame_norm2(sp, E3)))
                    << entry.id;
            }
            // T and A reverse the horizontal and vertical parts.
            EXPECT_LE(sp.frame_norm(sp.horizontal(sp.T(U, X))), tol) << entry.id;
            EXPECT_LE(sp.frame_norm(sp.vertical(sp.T(U, V))), tol) << entry.id;
            EXPECT_LE(sp.frame_norm(sp.horizontal(sp.A(X, Y))), tol) << entry.id;
            EXPECT_LE(sp.frame_norm(sp.vertical(sp.A(X, U))), tol) << entry.id;
            // T_X = 0 and A_U = 0.
            EXPECT_LE(sp.frame_norm(sp.T(X, E2)), tol) << entry.id;
            EXPECT_LE(sp.frame_norm(sp.A(U, E2)), tol) << entry.id;
        }
    }
}

TEST(Invariants, NormsByTwoContractions)
{
    for (const auto& entry : catalog()) {
        const LoadedCase lc = parse_case(entry);
        const SubmersionSpec& sub = *lc.submersion;
        SampleRng rng(29, "norms_" + entry.id, 0);
        for (int k = 0; k < 10; ++k) {
            const SubmersionPoint sp(sub, random_point(*sub.total, rng));
            EXPECT_NEAR(sp.normA2(), sp.normA2_mixed(), 1e-10 * (1 + std::abs(sp.normA2()))) << entry.id;
            EXPECT_NEAR(sp.normT2(), sp.normT2_mixed(), 1e-10 * (1 + std::abs(sp.normT2()))) << entry.id;
        }
    }
}

// For horizontal X and vertical U: g(A_X U, Y) = −g(U, A_X Y) and g(T_U V, X) = −g(V, T_U X).
TEST(Invariants, MixedSkewRelations)
{
    for (const auto& entry : catalog()) {
        const LoadedCase lc = parse_case(entry);
        const SubmersionSpec& sub = *lc.submersion;
        const int m = sub.total->dim;
        SampleRng rng(30, "mixed_" + entry.id, 0);
        for (int k = 0; k < 10; ++k) {
            const SubmersionPoint sp(sub, random_point(*sub.total, rng));
            const Vec U = sp.vertical(rng.vector(m)), V = sp.vertical(rng.vector(m));
            const Vec X = sp.horizontal(rng.vector(m)), Y = sp.horizontal(rng.vector(m));
            const double a = sp.g(sp.A(X, U), Y), b = -sp.g(U, sp.A(X, Y));
            const double c = sp.g(sp.T(U, V), X), d = -sp.g(V, sp.T(U, X));
            EXPECT_NEAR(a, b, 1e-10 * (1 + std::abs(a))) << entry.id;
            EXPECT_NEAR(c, d, 1e-10 * (1 + std::abs(c))) << entry.id;
        }
    }
}

TEST(MeanCurvature, WarpedClosedForm)
{
    // For g = dθ² − f²(dφ₁² + dφ₂²) the fibres are umbilic with H = −r (ln f)' ∂θ.
    const auto& sub = catalog_sub("warped-lorentz-t3");
    SampleRng rng(31, "H_closed", 0);
    for (int k = 0; k < 10; ++k) {
        const Vec x = random_point(*sub.total, rng);
        const SubmersionPoint sp(sub, x);
        const double f = 2 + std::cos(x[0]), f1 = -std::sin(x[0]);
        const Vec H = sp.H();
        EXPECT_NEAR(H[0], -2.0 * f1 / f, 1e-12);
        EXPECT_NEAR(H[1], 0.0, 1e-12);
        EXPECT_NEAR(H[2], 0.0, 1e-12);
    }
}
