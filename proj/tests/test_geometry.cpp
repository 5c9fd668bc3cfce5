#include "test_support.hpp"

#include <cmath>
#include <numbers>

using namespace oneill;
using namespace oneill::testing;

namespace {

const char* kSphere = R"(manifold S2 { dim 2 signature 0 coords theta phi
  domain theta in [0, pi] periodic phi 2*pi
  metric { g[0][0] = 1 g[1][1] = sin(theta)^2 } })";

const char* kCoshPlane = R"(manifold W { dim 2 signature 1 coords t x
  metric { g[0][0] = 1 g[1][1] = -cosh(t)^2 } })";

const char* kFlatTorus = R"(manifold T2 { dim 2 signature 1 coords theta phi
  periodic theta 2*pi periodic phi 2*pi
  metric { g[0][0] = 1 g[1][1] = -1 } })";

const char* kCosh3 = R"(manifold W3 { dim 3 signature 2 coords t x y
  metric { g[0][0] = 1 g[1][1] = -cosh(t)^2 g[2][2] = -cosh(t)^2 } })";

double model_constant(const Curvature& K, double c, const Vec& E, const Vec& F, const Vec& G, const Vec& G2)
{
    return c * (K.inner(E, G) * K.inner(F, G2) - K.inner(F, G) * K.inner(E, G2));
}

} // namespace

TEST(Metric, InverseAndDerivativeSymmetry)
{
    for (const auto& entry : catalog()) {
        const LoadedCase lc = parse_case(entry);
        const auto& spec = *lc.submersion->total;
        SampleRng rng(5, "metric_inv_" + entry.id, 0);
        for (int k = 0; k < 20; ++k) {
            const MetricAtPoint mp = metric_at(spec, random_point(spec, rng));
            const int m = spec.dim;
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) {
                    double acc = 0.0;
                    for (int c = 0; c < m; ++c) acc += mp.g(a, c) * mp.g_inv(c, b);
                    EXPECT_NEAR(acc, a == b ? 1.0 : 0.0, 1e-10) << entry.id;
                    EXPECT_EQ(mp.g(a, b), mp.g(b, a));
                    for (int c = 0; c < m; ++c) {
                        EXPECT_EQ(mp.dg(a, b, c), mp.dg(b, a, c));
                        for (int d = 0; d < m; ++d) {
                            EXPECT_EQ(mp.d2g(a, b, c, d), mp.d2g(b, a, c, d));
                            EXPECT_NEAR(mp.d2g(a, b, c, d), mp.d2g(a, b, d, c), 1e-12);
                        }
                    }
                }
        }
    }
}

TEST(Metric, DegenerateMetricRejected)
{
    const auto& spec = parse_manifold(kSphere, "S2");
    EXPECT_THROW(metric_at(spec, vec({0.0, 1.0})), DegenerateMetricError);
}

TEST(Christoffel, FlatTorusVanishes)
{
    const auto& spec = parse_manifold(kFlatTorus, "T2");
    const auto G = christoffel(spec, vec({0.7, 1.9}));
    for (const auto& c : G)
        for (const auto& a : c)
            for (double v : a) EXPECT_EQ(v, 0.0);
}

TEST(Christoffel, CoshPlane)
{
    const auto& spec = parse_manifold(kCoshPlane, "W");
    const double t = 0.5;
    const auto G = christoffel(spec, vec({t, 0.3}));
    EXPECT_NEAR(G[0][1][1], std::cosh(t) * std::sinh(t), 1e-14);
    EXPECT_NEAR(G[1][0][1], std::tanh(t), 1e-14);
    EXPECT_NEAR(G[1][0][1], 0.4621171572600098, 1e-14);
    EXPECT_EQ(G[1][0][1], G[1][1][0]);
    EXPECT_EQ(G[0][0][0], 0.0);
}

TEST(Christoffel, RoundSphere)
{
    const auto& spec = parse_manifold(kSphere, "S2");
    const auto G = christoffel(spec, vec({std::numbers::pi / 4, 0.0}));
    EXPECT_NEAR(G[0][1][1], -0.5, 1e-15);
    EXPECT_NEAR(G[1][0][1], 1.0, 1e-14); // cot(π/4)
}

TEST(Christoffel, SymmetricOnCatalog)
{
    for (const auto& entry : catalog()) {
        const LoadedCase lc = parse_case(entry);
        const auto& spec = *lc.submersion->total;
        SampleRng rng(6, "gamma_sym_" + entry.id, 0);
        const Curvature K = curvature_at(spec, random_point(spec, rng));
        for (int c = 0; c < spec.dim; ++c)
            for (int a = 0; a < spec.dim; ++a)
                for (int b = 0; b < spec.dim; ++b) EXPECT_EQ(K.christoffel(c, a, b), K.christoffel(c, b, a));
    }
}

TEST(Sectional, UnitSphereIsOne)
{
    const auto& spec = parse_manifold(kSphere, "S2");
    SampleRng rng(1, "sphere_k", 0);
    for (int k = 0; k < 20; ++k) {
        const Vec x = random_point(spec, rng);
        const Curvature K = curvature_at(spec, x);
        const Vec E = vec({1.0, 0.0});
        const Vec F = vec({0.0, 1.0 / std::sin(x[0])});
        EXPECT_NEAR(K.sectional(E, F), 1.0, 1e-8) << x[0];
        EXPECT_NEAR(K.riemann(E, F, E, F), 1.0, 1e-8);
        EXPECT_NEAR(K.scalar(), 2.0, 1e-8);
        EXPECT_NEAR(K.ricci(E, E), 1.0, 1e-8);
        // Any non-orthonormal pair spans the same plane.
        const Vec A = rng.vector(2), B = rng.vector(2);
        EXPECT_NEAR(K.sectional(A, B), 1.0, 1e-7);
    }
}

TEST(Sectional, FlatTorusIsZero)
{
    const auto& spec = parse_manifold(kFlatTorus, "T2");
    SampleRng rng(2, "flat_k", 0);
    for (int k = 0; k < 20; ++k) {
        const Curvature K = curvature_at(spec, random_point(spec, rng));
        const Vec E = rng.vector(2), F = rng.vector(2);
        EXPECT_LE(std::abs(K.riemann(E, F, E, F)), 1e-10);
        EXPECT_LE(std::abs(K.sectional(vec({1.0, 0.0}), vec({0.0, 1.0}))), 1e-10);
        EXPECT_LE(std::abs(K.scalar()), 1e-10);
    }
}

TEST(Sectional, DegeneratePlaneIsAnError)
{
    const auto& spec = parse_manifold(kCosh3, "W3");
    const Curvature K = curvature_at(spec, vec({0.0, 0.0, 0.0}));
    // E lightlike, F spacelike-negative and orthogonal to E.
    const Vec E = vec({1.0, 1.0, 0.0});
    const Vec F = vec({0.0, 0.0, 1.0});
    ASSERT_EQ(K.inner(E, E), 0.0);
    ASSERT_EQ(K.inner(E, F), 0.0);
    EXPECT_THROW(K.sectional(E, F), DegeneratePlaneError);
}

TEST(Riemann, CoshPlaneIsConstantCurvatureMinusOne)
{
    const auto& spec = parse_manifold(kCoshPlane, "W");
    SampleRng rng(3, "cosh_model", 0);
    for (int k = 0; k < 50; ++k) {
        const Curvature K = curvature_at(spec, random_point(spec, rng));
        const Vec E = rng.vector(2), F = rng.vector(2), G = rng.vector(2), G2 = rng.vector(2);
        const double lhs = K.riemann(E, F, G, G2);
        EXPECT_NEAR(lhs, model_constant(K, -1.0, E, F, G, G2), 1e-9 * (1 + std::abs(lhs)));
    }
}

// With two flat fibre directions only the planes containing ∂t have K = −1;
// the fibre plane has K = −tanh²t.
TEST(Riemann, CoshWarpSectionalCurvatures)
{
    const auto& spec = parse_manifold(kCosh3, "W3");
    SampleRng rng(3, "cosh_warp", 0);
    for (int k = 0; k < 20; ++k) {
        const Vec x = random_point(spec, rng);
        const Curvature K = curvature_at(spec, x);
        const Vec T = vec({1.0, 0.0, 0.0});
        const Vec V = vec({0.0, rng.symmetric(), rng.symmetric()});
        const Vec W = vec({0.0, 0.0, 1.0});
        EXPECT_NEAR(K.sectional(T, V), -1.0, 1e-10);
        EXPECT_NEAR(K.sectional(vec({0.0, 1.0, 0.0}), W), -std::tanh(x[0]) * std::tanh(x[0]), 1e-10);
    }
}

TEST(Riemann, SymmetriesAndBianchiOnCatalog)
{
    for (const auto& entry : catalog()) {
        const auto lc = parse_case(entry);
        for (const auto& spec : {lc.submersion->total, lc.submersion->base}) {
            const int m = spec->dim;
            SampleRng rng(4, "riemann_sym_" + entry.id + spec->name, 0);
            for (int k = 0; k < 20; ++k) {
                const Curvature K = curvature_at(*spec, random_point(*spec, rng));
                const Vec E = rng.vector(m), F = rng.vector(m), G = rng.vector(m), G2 = rng.vector(m);
                const double r = K.riemann(E, F, G, G2);
                const double tol = 1e-8 * (1 + std::abs(r));
                EXPECT_NEAR(r, -K.riemann(F, E, G, G2), tol) << entry.id;
                EXPECT_NEAR(r, -K.riemann(E, F, G2, G), tol) << entry.id;
                EXPECT_NEAR(r, K.riemann(G, G2, E, F), tol) << entry.id;
                const Vec b1 = K.riemann_vector(E, F, G), b2 = K.riemann_vector(F, G, E),
                          b3 = K.riemann_vector(G, E, F);
                for (int a = 0; a < m; ++a)
                    EXPECT_NEAR(b1[a] + b2[a] + b3[a], 0.0, 1e-8 * (1 + std::abs(b1[a]))) << entry.id;
            }
        }
    }
}

TEST(Ricci, FrameAndCoordinateFormsAgree)
{
    for (const auto& entry : catalog()) {
        const auto lc = parse_case(entry);
        for (const auto& spec : {lc.submersion->total, lc.submersion->base}) {
            const int m = spec->dim;
            SampleRng rng(8, "ricci_" + entry.id + spec->name, 0);
            for (int k = 0; k < 10; ++k) {
                const Curvature K = curvature_at(*spec, random_point(*spec, rng));
                const Vec E = rng.vector(m), F = rng.vector(m);
                const double r = K.ricci(E, F);
                EXPECT_NEAR(r, K.ricci_coordinate(E, F), 1e-9 * (1 + std::abs(r))) << entry.id;
                EXPECT_NEAR(r, K.ricci(F, E), 1e-9 * (1 + std::abs(r))) << entry.id;
                EXPECT_NEAR(K.scalar(), K.scalar_coordinate(), 1e-9 * (1 + std::abs(K.scalar()))) << entry.id;
            }
        }
    }
}

TEST(Scalar, ProductOfCircles)
{
    const auto& spec = parse_manifold(kFlatTorus, "T2");
    EXPECT_LE(std::abs(curvature_at(spec, vec({1.0, 2.0})).scalar()), 1e-12);
}

TEST(Scalar, HopfBaseIsRoundSphereOfRadiusOneHalf)
{
    const auto& base = *catalog_sub("hopf").base;
    SampleRng rng(9, "hopf_base", 0);
    for (int k = 0; k < 20; ++k) {
        const Vec y = random_point(base, rng);
        const Curvature K = curvature_at(base, y);
        const Vec E = vec({1.0, 0.0});
        const Vec F = vec({0.0, 1.0 / (std::sin(y[0]) * std::cos(y[0]))});
        EXPECT_NEAR(K.sectional(E, F), 4.0, 1e-5);
        EXPECT_NEAR(K.scalar(), 8.0, 1e-5);
    }
}

TEST(Gradient, SphereAndWarp)
{
    const auto& spec = parse_manifold(kSphere, "S2");
    const ExprPtr f = parse_expression("cos(theta) + sin(phi)", spec.coords);
    const Vec x = vec({0.8, 0.3});
    const Vec g = gradient(spec, *f, x);
    EXPECT_NEAR(g[0], -std::sin(0.8), 1e-15);
    EXPECT_NEAR(g[1], std::cos(0.3) / (std::sin(0.8) * std::sin(0.8)), 1e-14);

    const auto& w = parse_manifold(kCoshPlane, "W");
    const Vec gw = gradient(w, *parse_expression("x", w.coords), vec({0.5, 0.0}));
    EXPECT_NEAR(gw[1], -1.0 / (std::cosh(0.5) * std::cosh(0.5)), 1e-15);
}

TEST(Divergence, GradientOfLogWarpOnCircle)
{
    const auto& s1 = *catalog_sub("warped-lorentz-t3").base;
    const auto& t3 = *catalog_sub("warped-lorentz-t3").total;
    SampleRng rng(10, "div_grad", 0);
    for (int k = 0; k < 20; ++k) {
        const double th = rng.uniform(0.0, 2 * std::numbers::pi);
        const double f = 2 + std::cos(th), f1 = -std::sin(th), f2 = -std::cos(th);
        const double h1 = f1 / f;
        const double h2 = (f2 * f - f1 * f1) / (f * f);
        // grad ln f on S¹ is (ln f)' ∂θ; div grad is (ln f)''.
        const JetField grad_s1 = expr_field({parse_expression("-sin(theta)/(2 + cos(theta))", s1.coords)});
        EXPECT_NEAR(divergence(s1, grad_s1, vec({th})), h2, 1e-12);
        // On the warped torus the volume density f² adds 2 h' f'/f.
        const JetField grad_t3 = expr_field({parse_expression("-sin(theta)/(2 + cos(theta))", t3.coords),
                                             expr::constant(0.0), expr::constant(0.0)});
        const Vec x = vec({th, rng.uniform(0.0, 6.0), rng.uniform(0.0, 6.0)});
        EXPECT_NEAR(divergence(t3, grad_t3, x), h2 + 2 * h1 * f1 / f, 1e-12);
    }
}

TEST(Divergence, FrameAndCoordinateFormsAgree)
{
    for (const auto& entry : catalog()) {
        const LoadedCase lc = parse_case(entry);
        const auto& spec = *lc.submersion->total;
        std::vector<ExprPtr> comps;
        const char* templates[] = {"sin(%s) + 0.3", "cos(%s)^2", "exp(0.2*%s)"};
        for (int a = 0; a < spec.dim; ++a) {
            char buf[64];
            std::snprintf(buf, sizeof buf, templates[a % 3], spec.coords[(a + 1) % spec.dim].c_str());
            comps.push_back(parse_expression(buf, spec.coords));
        }
        const JetField E = expr_field(comps);
        SampleRng rng(12, "div_forms_" + entry.id, 0);
        for (int k = 0; k < 10; ++k) {
            const Vec x = random_point(spec, rng);
            const Curvature K = curvature_at(spec, x);
            const JetVec Ex = E(x);
            const double a = divergence_frame(K, Ex), b = divergence_coordinate(K, Ex);
            EXPECT_NEAR(a, b, 1e-9 * (1 + std::abs(a))) << entry.id;
        }
    }
}
