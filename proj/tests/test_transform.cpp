#include "doctest.h"

#include <cmath>

#include "cansys/structured.hpp"
#include "cansys/transform.hpp"

using namespace cansys;

namespace {

// Composite Simpson on [a, b] with m (even) panels.
template <class F>
Mat simpson(F f, double a, double b, int m, int rows, int cols) {
    Mat acc = Mat::Zero(rows, cols);
    if (b <= a) return acc;
    double h = (b - a) / m;
    for (int i = 0; i <= m; ++i) {
        double w = (i == 0 || i == m) ? 1 : (i % 2 ? 4 : 2);
        acc += w * f(a + i * h);
    }
    return acc * (h / 3);
}

// Right-hand side of the V_k recursion evaluated literally by nested quadrature:
// three double integrals with u4 and three triple integrals with F.
Mat brute_Vk(const SeriesData& d, const Kernel2& prev, double x, double z, int m = 24) {
    int b = d.b();
    auto F = [&](double s, double eta) { return Mat(d.h1.value(s) * d.h2.value(eta)); };
    auto term = [&](double t0, double t1, auto a_of) {
        return simpson([&](double t) {
            double a = std::max(0.0, a_of(t));
            Mat u = simpson([&](double s) { return Mat(d.u4.value(s) * prev(s, a)); }, a, t, m, b, b);
            Mat f = simpson([&](double s) {
                return simpson([&](double eta) { return Mat(F(s, eta) * prev(eta, a)); }, a, s, m, b, b);
            }, a, t, m, b, b);
            return Mat(u - f);
        }, t0, t1, m, b, b);
    };
    Mat v = term(x - z, x, [&](double t) { return z + t - x; });
    v += term((x + z) / 2, x, [&](double t) { return z + x - t; });
    v += term((x - z) / 2, x - z, [&](double t) { return x - t - z; });
    return 0.5 * v;
}

const std::vector<std::pair<double, double>> kPoints{{0.2, 0.1}, {0.5, 0.0}, {0.5, 0.25}, {0.7, 0.3}, {0.8, 0.8},
                                                     {0.9, 0.45}, {1.0, 0.1}, {1.0, 0.6}, {1.0, 1.0}, {0.35, 0.3},
                                                     {0.6, 0.55}, {0.95, 0.2}};

} // namespace

TEST_CASE("V1 closed forms") {
    auto unit = builtin_series("unit");
    auto honly = builtin_series("h-only");
    for (auto [x, z] : kPoints) {
        CHECK(std::abs(series_V1(unit, x, z)(0, 0) - x / 2) < 1e-8);
        CHECK(std::abs(series_V1(honly, x, z)(0, 0) + (x * x - z * z) / 4) < 1e-10);
    }
}

TEST_CASE("V2 against nested quadrature") {
    auto unit = builtin_series("unit");
    Kernel2 half = [](double x, double) { return Mat::Constant(1, 1, x / 2); };
    for (auto [x, z] : kPoints) CHECK((series_Vk(unit, half, x, z) - brute_Vk(unit, half, x, z)).norm() < 1e-6);

    auto honly = builtin_series("h-only");
    Kernel2 v1 = [](double x, double z) { return Mat::Constant(1, 1, -(x * x - z * z) / 4); };
    for (auto [x, z] : kPoints) CHECK((series_Vk(honly, v1, x, z) - brute_Vk(honly, v1, x, z)).norm() < 1e-6);

    auto mixed = builtin_series("mixed");
    Kernel2 m1 = [&](double x, double z) { return series_V1(mixed, x, z); };
    for (auto [x, z] : {std::pair{0.7, 0.3}, {1.0, 0.5}, {0.4, 0.1}})
        CHECK((series_Vk(mixed, m1, x, z) - brute_Vk(mixed, m1, x, z, 16)).norm() < 1e-6);
}

TEST_CASE("zero previous term gives a zero term") {
    auto mixed = builtin_series("mixed");
    Kernel2 zero = [](double, double) { return Mat::Zero(1, 1); };
    CHECK(series_Vk(mixed, zero, 0.6, 0.2).norm() == 0.0);
}

TEST_CASE("series bound on all builtin data") {
    for (auto name : {"unit", "h-only", "mixed"}) {
        auto s = series_sum(builtin_series(name), 4);
        CHECK_MESSAGE(s.bound_holds, name);
        for (size_t k = 1; k < s.bound_ratio.size(); ++k) CHECK(s.bound_ratio[k] < 1.0);
    }
    auto z = series_sum(builtin_series("zero"), 4);
    for (double m : z.max_norm) CHECK(m == 0.0);
    CHECK(z.sum(0.5, 0.2).norm() == 0.0);
}

TEST_CASE("series tables interpolate the terms") {
    auto d = builtin_series("unit");
    auto s = series_sum(d, 3);
    for (auto [x, z] : kPoints) CHECK(std::abs(s.terms[0](x, z)(0, 0) - x / 2) < 1e-10);
    auto k = s.kernel();
    CHECK(k.domain == KernelDomain::triangle);
    CHECK(series_bound(1.0, 1, 0.5) == doctest::Approx(1.0));
    CHECK(series_bound(1.0, 3, 0.5) == doctest::Approx(9.0 / 2 * 0.25));
}

TEST_CASE("V0 from V = I") {
    Grid g(1.0, 32);
    auto one = amplitude_profile("one");
    auto v = build_V0(identity_operator(g, 1), one);
    CHECK((v.V0.M - Mat::Identity(32, 32)).norm() < 1e-12);
    auto b2 = scalar_profile([](double x) { return std::exp(0.5 * I1 * x); },
                             [](double x) { return 0.5 * I1 * std::exp(0.5 * I1 * x); }, {}, 1, "b2");
    std::vector<double> err;
    for (int n : {32, 64, 128}) {
        Grid gg(1.0, n);
        auto w = build_V0(identity_operator(gg, 1), b2);
        double e = 0;
        for (int j = 0; j < n; ++j)
            e = std::max(e, std::abs(w.kernel[j](0, 0) - 0.5 * I1 * std::exp(0.5 * I1 * (j * gg.h()))));
        err.push_back(e);
        CHECK(w.commutation_residual < 1e-12);
    }
    CHECK(err[2] < err[0] / 10);
    auto a40 = a40_residual([](double x) { return Mat::Constant(1, 1, 0.5 * I1 * std::exp(0.5 * I1 * x)); },
                            [](double y) { return y; }, 1.0);
    CHECK(a40 < 1e-10);
}

TEST_CASE("normalized E of example64 is the identity") {
    Grid g(1.0, 64);
    auto e = discrete_normalized_E(builtin_system("example64", 1.0), g);
    CHECK((e.E.M - Mat::Identity(64, 64)).norm() < 1e-6);
    for (int j = 0; j <= 64; ++j) CHECK(std::abs(e.Phi1_nodes[j](0, 0) - I1 * g.node(j)) < 1e-10);
}

TEST_CASE("normalized E of example65 recovers 2e^{it}-1") {
    Grid g(1.0, 256);
    auto e = discrete_normalized_E(builtin_system("example65", 1.0), g, 0);
    double err = 0;
    for (int j = 0; j <= 256; ++j) err = std::max(err, std::abs(e.Phi1_nodes[j](0, 0) - (2.0 * std::exp(I1 * g.node(j)) - 1.0)));
    CHECK(err < 1e-2);
    CHECK(e.similarity_residual < 1e-10);
    CHECK(e.normalization_residual < 1e-10);
}

TEST_CASE("global solve reports a trivial null space") {
    auto e = discrete_normalized_E(builtin_system("example65", 1.0), Grid(1.0, 12), 16);
    CHECK(e.nullity == 0);
    CHECK(e.qr_difference >= 0);
    CHECK(e.qr_difference < 1e-8);
}

TEST_CASE("example23 amplitude passes the a-posteriori checks") {
    Grid g(1.0, 256);
    auto e = discrete_normalized_E(builtin_system("example23", 1.0), g, 0);
    CHECK(convolution_identity_residual(e.phi1_profile(), g) < 1e-3);
}

TEST_CASE("E residuals decrease under refinement") {
    for (auto name : {"example23", "example65", "admissible"}) {
        auto sys = builtin_system(name, 1.0);
        auto a = discrete_normalized_E(sys, Grid(1.0, 32), 0), b = discrete_normalized_E(sys, Grid(1.0, 128), 0);
        CHECK(a.similarity_residual < 1e-8);
        CHECK(b.similarity_residual < 1e-8);
        CHECK(b.normalization_residual <= std::max(a.normalization_residual, 1e-12));
    }
}

TEST_CASE("smoothness diagnostics") {
    Grid g(1.0, 64);
    auto sq = scalar_profile([](double x) { return cplx(x * x); }, [](double x) { return cplx(2 * x); },
                             [](double) { return cplx(2); }, 1, "x2");
    auto id = smoothness_diagnostics(identity_operator(g, 1), sq);
    CHECK(std::abs(id.output_defect - id.input_defect) < 1e-14);
    auto e = discrete_normalized_E(builtin_system("example65", 1.0), g, 0);
    auto rep = smoothness_diagnostics(e.E, sq);
    CHECK(rep.output_defect < 1e-2);
}
