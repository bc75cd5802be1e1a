#include "doctest.h"

#include <cmath>

#include "cansys/weyl.hpp"

using namespace cansys;

namespace {
Mat zeta(cplx lam, bool first) {
    auto q = quadratic_roots(lam);
    return Mat::Constant(1, 1, first ? q.zeta1 : q.zeta2);
}
} // namespace

TEST_CASE("mobius with the identity fundamental solution") {
    Mat W = Mat::Identity(2, 2);
    Mat P1 = Mat::Constant(1, 1, 2.0), P2 = Mat::Constant(1, 1, cplx(0, 1));
    Mat phi = mobius(W, P1, P2);
    CHECK(std::abs(phi(0, 0) - cplx(0, 0.5)) < 1e-15);
    Mat phat = mobius(W, P1, P2, true);
    CHECK(std::abs(phat(0, 0) - cplx(-0.5, 0)) < 1e-15);
    CHECK_THROWS_AS(mobius(W, Mat::Zero(1, 1), P2), SingularError);
}

TEST_CASE("example23 pair is property-j") {
    auto sys = builtin_system("example23", 1.0);
    auto pair = example23_pair(1.0, Mat::Identity(1, 1));
    for (cplx lam : default_lambda_grid()) {
        auto pc = check_pair(pair, sys.signature(), lam);
        CHECK(pc.pass);
    }
}

TEST_CASE("zeta1 belongs to every checked disk and zeta2 to none") {
    auto sys = builtin_system("example23", 1.0);
    auto lams = default_lambda_grid();
    for (double r : {0.5, 1.0, 2.0}) {
        Grid g(r, 1024);
        double worst = 1e300;
        int impostor_fail = 0;
        for (cplx lam : lams) {
            Mat W = integrate_fundamental(sys, lam, g).end();
            worst = std::min(worst, disk_inequality_residual(W, zeta(lam, true), sys.signature()));
            if (disk_inequality_residual(W, zeta(lam, false), sys.signature()) < -1e-8) ++impostor_fail;
        }
        CHECK(worst >= -1e-8);
        CHECK(impostor_fail == static_cast<int>(lams.size()));
    }
}

TEST_CASE("weyl function of the example23 pair is zeta1") {
    auto sys = builtin_system("example23", 2.0);
    std::vector<cplx> lams{I1, cplx(2, 0.5), cplx(-1, 3)};
    for (double r : {0.5, 1.0, 2.0}) {
        auto ws = weyl_samples(sys, example23_pair(r, Mat::Identity(1, 1)), lams, r, 1024);
        for (size_t k = 0; k < lams.size(); ++k) CHECK(std::abs(ws.phi[k](0, 0) - zeta(lams[k], true)(0, 0)) < 1e-4);
    }
}

TEST_CASE("nestedness across r") {
    auto sys = builtin_system("example23", 2.0);
    auto rep = nestedness_check(sys, example23_pair(2.0, Mat::Identity(1, 1)), 0.5, 2.0, default_lambda_grid(), 1024);
    CHECK(rep.pass);
    CHECK_FALSE(rep.certified.empty());
    auto bad = nestedness_check(sys, example23_pair(2.0, Mat::Identity(1, 1)), 0.5, 2.0, default_lambda_grid(), 1024,
                                1e-8, [](cplx lam) { return zeta(lam, false); });
    CHECK_FALSE(bad.pass);
}

TEST_CASE("cayley transform round trip") {
    Mat phi = Mat::Constant(1, 1, cplx(0.3, -0.4));
    Mat h = cayley(phi);
    CHECK((cayley_inverse(h) - phi).norm() < 1e-14);
    CHECK(contraction_norm(phi) < 1.0);
    CHECK(herglotz_min_eig(h) > 0);
}

TEST_CASE("partial integrals of the Weyl solution stay bounded") {
    auto sys = builtin_system("example23", 1.0);
    cplx lam(0.5, 1.0);
    auto rep = summability_partial(sys, zeta(lam, true), lam, {1, 2, 4, 8});
    CHECK(rep.bounded);
    CHECK(rep.I.back() < 1e6);
}
