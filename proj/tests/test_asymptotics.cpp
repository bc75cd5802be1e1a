#include "doctest.h"

#include <cmath>

#include "cansys/asymptotics.hpp"
#include "cansys/structured.hpp"
#include "cansys/weyl.hpp"

using namespace cansys;

namespace {
Mat f65(double t) { return Mat::Constant(1, 1, 2.0 * std::exp(I1 * t) - 1.0); }

std::function<Mat(cplx)> finite_hat(double r) {
    return [r](cplx lam) {
        auto c = closed_form_example64({r}, lam);
        return mobius(c.Winv, Mat::Identity(1, 1), Mat::Identity(1, 1), true);
    };
}
} // namespace

TEST_CASE("branch square root") {
    cplx z = branch_sqrt(cplx(0, 1));
    CHECK(z.real() > 0);
    CHECK(z.imag() > 0);
    CHECK(std::abs(z * z - I1) < 1e-15);
    CHECK_THROWS_AS(branch_sqrt(cplx(-1, 0)), DomainError);
    CHECK_THROWS_AS(branch_sqrt(cplx(1, -1)), DomainError);
}

TEST_CASE("filon weights integrate piecewise-linear data exactly") {
    int N = 10;
    double h = 0.1;
    std::vector<cplx> f;
    for (int j = 0; j <= N; ++j) f.push_back(1.0 + 2.0 * j * h);
    for (cplx z : {cplx(0.01, 0.01), cplx(3, 1), cplx(200, 200)}) {
        cplx iz = I1 * z, T = N * h;
        cplx e = std::exp(iz * T);
        // int_0^T e^{izt} (1 + 2t) dt
        cplx exact = (e - 1.0) / iz + 2.0 * (e * (T / iz - 1.0 / (iz * iz)) + 1.0 / (iz * iz));
        CHECK(std::abs(filon_integral(z, h, f) - exact) < 1e-12 * std::max(1.0, std::abs(exact)));
    }
}

TEST_CASE("ray points") {
    auto z = ray_points(M_PI / 4, 2, 200, 5);
    CHECK(std::abs(z.front()) == doctest::Approx(2));
    CHECK(std::abs(z.back()) == doctest::Approx(200));
    CHECK(std::arg(z[2]) == doctest::Approx(M_PI / 4));
    CHECK_THROWS_AS(ray_points(0.5, 0, 1, 3), DomainError);
}

TEST_CASE("asymptotics of example65") {
    Grid g(1.0, 1024);
    auto s = sample_ray(builtin_weyl("example65"), 1.0, false, ray_points(M_PI / 4, 2, 200, 40));
    auto rep = verify_asymptotics(s, sample_nodes(amplitude_profile("example65"), g), g.h());
    CHECK(rep.pass);
    CHECK(rep.n_resolved >= 4);
    auto wrong = verify_asymptotics(s, sample_nodes(amplitude_profile("one"), g), g.h());
    CHECK_FALSE(wrong.pass);
}

TEST_CASE("small interval keeps decaying on the outer samples") {
    Grid g(0.1, 2048);
    auto s = sample_ray(builtin_weyl("example65"), 0.1, false, ray_points(M_PI / 4, 2, 200, 40));
    CHECK(verify_asymptotics(s, sample_nodes(amplitude_profile("example65"), g), g.h()).pass);
}

TEST_CASE("hat asymptotics of example64") {
    Grid g(1.0, 1024);
    auto s = sample_ray(finite_hat(1.0), 1.0, true, ray_points(M_PI / 4, 2, 200, 40));
    CHECK(verify_asymptotics(s, sample_nodes(amplitude_profile("example64"), g), g.h()).pass);
    cplx z = std::polar(100.0, M_PI / 4);
    CHECK(std::abs(finite_hat(1.0)(z * z)(0, 0) - I1 / z) / std::abs(I1 / z) < 1e-3);
}

TEST_CASE("too few samples is an error") {
    RaySamples s;
    s.z = {cplx(1, 1)};
    s.phi = {Mat::Zero(1, 1)};
    CHECK_THROWS_AS(verify_asymptotics(s, {Mat::Zero(1, 1), Mat::Zero(1, 1)}, 1.0), DomainError);
}

TEST_CASE("amplitude extraction") {
    int n = 64;
    auto s = sample_ray(builtin_weyl("example65"), 1.0, false, ray_points(M_PI / 4, 2, 200, extraction_sample_count(n)));
    auto est = extract_phi1(s, n);
    CHECK(est.l2_error(f65) < 1e-2);
    CHECK(est.condition > 1e-15);

    auto sh = sample_ray(builtin_weyl("example64"), 1.0, true, ray_points(M_PI / 4, 2, 200, extraction_sample_count(n)));
    auto eh = extract_phi1(sh, n);
    CHECK(eh.l2_error([](double t) { return Mat::Constant(1, 1, I1 * t); }) < 1e-8);

    auto one = amplitude_profile("one");
    auto ss = sample_ray([&](cplx lam) { return main_term(one, 1.0, n, branch_sqrt(lam)); }, 1.0, false,
                         ray_points(M_PI / 4, 2, 200, extraction_sample_count(n)));
    ExtractOptions o;
    o.kappa = 1.0;
    o.tail = false;
    CHECK(extract_phi1(ss, n, o).max_error([](double) { return Mat::Identity(1, 1); }) < 1e-8);
}

TEST_CASE("an ill-posed design is reported") {
    auto s = sample_ray(builtin_weyl("example65"), 1.0, false, ray_points(M_PI / 4, 2, 2.1, 3));
    ExtractOptions o;
    o.reg = 0;
    o.min_rcond = 1e-3;
    CHECK_THROWS_AS(extract_phi1(s, 64, o), SingularError);
}

TEST_CASE("uniqueness probe separates different amplitudes") {
    std::vector<cplx> z{cplx(1, 1), cplx(3, 2), cplx(10, 10)};
    auto same = uniqueness_probe(f65, f65, 1.0, z);
    CHECK_FALSE(same.separated);
    auto diff = uniqueness_probe(f65, [](double) { return Mat::Identity(1, 1); }, 1.0, z);
    CHECK(diff.separated);
    CHECK(diff.l2_difference > 0.1);
}
