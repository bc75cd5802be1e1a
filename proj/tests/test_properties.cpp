#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "cansys/asymptotics.hpp"
#include "cansys/io.hpp"
#include "cansys/snode.hpp"
#include "cansys/structured.hpp"
#include "cansys/transform.hpp"
#include "cansys/weyl.hpp"

using namespace cansys;

namespace {

std::vector<cplx> random_upper(std::mt19937& rng, int count, double re = 5, double im_lo = 0.1, double im_hi = 10) {
    std::uniform_real_distribution<double> ur(-re, re), ui(std::log(im_lo), std::log(im_hi));
    std::vector<cplx> out;
    for (int k = 0; k < count; ++k) out.emplace_back(ur(rng), std::exp(ui(rng)));
    return out;
}

Mat random_mat(std::mt19937& rng, int r, int c) {
    std::normal_distribution<double> nd;
    Mat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int k = 0; k < c; ++k) m(i, k) = cplx(nd(rng), nd(rng));
    return m;
}

} // namespace

TEST_CASE("causality: a tail perturbation beyond l leaves [0, l] untouched") {
    Grid g(1.0, 64);
    double ell = 0.5;
    int k = 32;
    for (double eps : {0.5, 5.0}) {
        auto base = builtin_system("admissible", 1.0);
        auto pert = builtin_system("admissible", 1.0, {{"tail_eps", eps}, {"tail_ell", ell}});
        REQUIRE((base.beta.value(0.9) - pert.beta.value(0.9)).norm() > 1e-3);
        auto e0 = discrete_normalized_E(base, g, 0), e1 = discrete_normalized_E(pert, g, 0);
        CHECK((e0.Phi1.topRows(k) - e1.Phi1.topRows(k)).norm() < 1e-8);
        auto n0 = restrict_node(snode_from_E(e0.E.M, base, g), ell);
        auto n1 = restrict_node(snode_from_E(e1.E.M, pert, g), ell);
        for (cplx lam : {I1, cplx(1, 1), 4.0 * I1}) {
            Mat w0 = transfer_wA(n0, 1.0 / lam).w, w1 = transfer_wA(n1, 1.0 / lam).w;
            CHECK((w0 - w1).norm() < 1e-8);
        }
    }
}

TEST_CASE("normalized E is unique among triangular solutions") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> ua(0.05, 0.4), ub(0.5, 3), uw(-1, 1);
    for (int trial = 0; trial < 5; ++trial) {
        auto sys = builtin_system("admissible", 1.0, {{"a", ua(rng)}, {"b", ub(rng)}, {"theta_rate", uw(rng)}});
        auto e = discrete_normalized_E(sys, Grid(1.0, 10), 16);
        CHECK(e.nullity == 0);
        CHECK(e.qr_difference < 1e-8);
        CHECK(e.similarity_residual < 1e-10);
    }
}

TEST_CASE("AS - SA* decomposes for random S") {
    std::mt19937 rng(3);
    for (int n : {8, 17, 32}) {
        Grid g(1.0, n);
        for (int b : {1, 2}) CHECK(s3_decomposition_residual(random_mat(rng, n * b, n * b), volterra_calA(g, b)) < 1e-10);
    }
}

TEST_CASE("j-relation on random spectral parameters") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> ur(-6, 6);
    Grid g(1.0, 256);
    for (auto name : {"example23", "example65", "admissible"}) {
        auto sys = builtin_system(name, 1.0);
        for (int k = 0; k < 5; ++k) CHECK(integrate_fundamental(sys, ur(rng), g).j_residual < 1e-12);
        for (cplx lam : random_upper(rng, 5, 5, 0.1, 4)) CHECK(integrate_fundamental(sys, lam, g).j_residual < 1e-5);
    }
}

TEST_CASE("Weyl functions are contractive or Herglotz on random points") {
    std::mt19937 rng(9);
    auto f65 = builtin_weyl("example65");
    auto f64 = builtin_weyl("example64");
    auto f23 = builtin_weyl("example23");
    for (cplx lam : random_upper(rng, 200, 50, 1e-3, 100)) {
        CHECK(contraction_norm(f65(lam)) < 1.0);
        CHECK(contraction_norm(f23(lam)) < 1.0);
        CHECK(herglotz_min_eig(f64(lam)) > 0);
        Mat c = cayley(f65(lam));
        CHECK((cayley_inverse(c) - f65(lam)).norm() < 1e-10);
    }
}

TEST_CASE("disk inequality holds at random points for the example23 pair") {
    std::mt19937 rng(13);
    auto sys = builtin_system("example23", 1.0);
    auto pair = example23_pair(1.0, Mat::Identity(1, 1));
    auto s = weyl_samples(sys, pair, random_upper(rng, 20, 5, 0.2, 10), 1.0, 1024);
    for (double m : s.min_eig) CHECK(m >= -1e-8);
}

TEST_CASE("flip is an involution exchanging calA and its adjoint") {
    std::mt19937 rng(17);
    for (int b : {1, 2}) {
        Grid g(1.0, 20);
        Mat f = random_mat(rng, 20 * b, 3);
        CHECK((flip(flip(f, b), b) - f).norm() == 0.0);
        DiscreteOperator A{g, b, volterra_calA(g, b)};
        CHECK((flip_conjugate(A).M - A.M.adjoint()).norm() < 1e-14);
    }
}

TEST_CASE("profile files survive a round trip for random sampled profiles") {
    std::mt19937 rng(19);
    Grid g(1.0, 12);
    std::vector<Mat> v, d1, d2;
    for (int i = 0; i <= 12; ++i) {
        v.push_back(random_mat(rng, 1, 2));
        d1.push_back(random_mat(rng, 1, 2));
        d2.push_back(random_mat(rng, 1, 2));
    }
    auto f = MatrixProfile::sampled(g.nodes(), v, d1, d2, "random");
    std::stringstream ss;
    write_profile_csv(ss, f, g);
    auto back = read_profile_csv(ss, "random", 1e300).profile;
    for (int i = 0; i <= 12; ++i) {
        double x = g.node(i);
        CHECK(back.value(x) == v[i]);
        CHECK(back.d1(x) == d1[i]);
        CHECK(back.d2(x) == d2[i]);
    }
}

TEST_CASE("computations are deterministic") {
    auto sys = builtin_system("example65", 1.0);
    Grid g(1.0, 64);
    auto a = discrete_normalized_E(sys, g, 0), b = discrete_normalized_E(sys, g, 0);
    CHECK((a.E.M - b.E.M).norm() == 0.0);
    auto sa = sample_ray(builtin_weyl("example65"), 1.0, false, ray_points(M_PI / 4, 2, 200, extraction_sample_count(32)));
    auto p = extract_phi1(sa, 32), q = extract_phi1(sa, 32);
    for (size_t j = 0; j < p.values.size(); ++j) CHECK(p.values[j] == q.values[j]);
}
