#include "doctest.h"

#include <cmath>

#include "cansys/snode.hpp"
#include "cansys/structured.hpp"
#include "cansys/transform.hpp"

using namespace cansys;

namespace {
const std::vector<cplx> kLams{I1, cplx(1, 1), 4.0 * I1};
}

TEST_CASE("identity node of example64") {
    auto sys = builtin_system("example64", 1.0);
    Grid g(1.0, 64);
    auto node = snode_identity(sys, g);
    CHECK(node.identity_residual < 1e-12);
    CHECK(node.min_eig_S == doctest::Approx(1.0));
    auto rc = check_restriction(node, 0.5);
    CHECK(rc.s_residual < 1e-14);
    CHECK(rc.identity_residual < 1e-12);
    CHECK_THROWS_AS(restrict_node(node, 0.3), DomainError);
}

TEST_CASE("factorization of example64") {
    auto sys = builtin_system("example64", 1.0);
    Grid g(1.0, 256);
    auto fr = factorization_residual(sys, snode_identity(sys, g), {0.25, 0.5, 1.0}, kLams);
    CHECK(fr.residual.size() == 9);
    CHECK(fr.worst < 1e-3);
}

TEST_CASE("factorization through the discrete E of example65") {
    auto sys = builtin_system("example65", 1.0);
    Grid g(1.0, 128);
    auto e = discrete_normalized_E(sys, g, 0);
    auto node = snode_from_E(e.E.M, sys, g);
    CHECK(node.identity_residual < 1e-8);
    CHECK(node.min_eig_S > 0);
    auto fr = factorization_residual(sys, node, {0.25, 0.5, 1.0}, kLams);
    CHECK(fr.worst < 1e-3);
    auto H = hamiltonian_from_snode(node.Pi, node.S, g, 1);
    double err = 0;
    for (int k = 0; k < g.n; ++k) err = std::max(err, (H[k] - sys.H(g.mid(k))).norm());
    CHECK(err < 1e-2);
}

TEST_CASE("transfer function identity") {
    auto sys = builtin_system("example64", 1.0);
    auto node = snode_identity(sys, Grid(1.0, 64));
    for (cplx lam : {cplx(0, 2), cplx(1, 0.5), cplx(3, 0)}) CHECK(identity_M1_residual(node, lam) < 1e-10);
    Mat w = transfer_wA(node, cplx(0, 1e8)).w;
    CHECK((w - Mat::Identity(2, 2)).norm() < 1e-6);
    auto t = transfer_wA(node, 0.0);
    CHECK(t.ill_conditioned);
}

TEST_CASE("resolvent closed forms") {
    Grid g(1.0, 256);
    auto rr = resolvent_closed_forms(cplx(M_PI, 0), g, amplitude_profile("example65"));
    CHECK(std::abs(rr.m6_closed) < 1e-15);
    CHECK(rr.m4_residual < 1e-3);
    CHECK(rr.m5_residual < 1e-3);
    CHECK(rr.m6_error < 1e-3);
    CHECK(rr.m7_error < 1e-3);
    auto q = resolvent_closed_forms(cplx(3, 2), g, amplitude_profile("example65"));
    cplx e = std::exp(2.0 * I1 * cplx(3, 2));
    CHECK(q.m8_ratio == doctest::Approx(2 * std::abs(e) / std::abs(e - 1.0)));
}
