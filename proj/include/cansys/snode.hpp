#pragma once

#include <vector>

#include "cansys/system.hpp"

namespace cansys {

// S-node {A, S, Pi} on the midpoint grid.  A is the assembled (t - x) kernel,
// S = E^{-1} E^{-*} and Pi = E^{-1} beta.  S^{-1} = E^* E is kept directly.
struct SNode {
    Grid grid;
    int b = 1; // m2
    Mat sig;   // j, or J in the hat case
    Mat E;     // lower-triangular transformation
    Mat B;     // beta at midpoints, n b x m
    Mat A, S, Sinv, Pi;
    double identity_residual = 0; // |A S - S A^* - i Pi sig Pi^*|
    double min_eig_S = 0;
};

SNode snode_from_E(const Mat& E, const CanonicalSystem& sys, const Grid& g);
// Node with E = I, exact for beta(x) = [ix I, I] under J.
SNode snode_identity(const CanonicalSystem& sys, const Grid& g);

// Restriction to [0, l]; l must be a grid node.
SNode restrict_node(const SNode& node, double ell);
// |S_l - E_l^{-1} E_l^{-*}| and the restricted identity residual.
struct RestrictionCheck {
    double s_residual = 0;
    double identity_residual = 0;
};
RestrictionCheck check_restriction(const SNode& full, double ell);

struct Transfer {
    Mat w;
    double rcond = 0;
    bool ill_conditioned = false;
};
// w_A(mu) = I - i sig Pi^* S^{-1} (A - mu I)^{-1} Pi.
Transfer transfer_wA(const SNode& node, cplx mu);

struct FactorizationReport {
    std::vector<double> ells;
    std::vector<cplx> lams;
    std::vector<double> residual; // row-major over (ell, lam)
    double worst = 0;
};
FactorizationReport factorization_residual(const CanonicalSystem& sys, const SNode& node,
                                           const std::vector<double>& ells, const std::vector<cplx>& lams);

// |W^* sig W - sig - i(lam - conj lam) Pi^* (I - conj(lam) A^*)^{-1} S^{-1} (I - lam A)^{-1} Pi|
// with W = w_A(1/lam) unless W is supplied.
double identity_M1_residual(const SNode& node, cplx lam, const Mat* W = nullptr);

struct ResolventReport {
    cplx z;
    double m4_residual = 0;  // direct inverse of I - z^2 A against the kernel formula
    double m5_residual = 0;  // (I - z^2 A)^{-1} 1 against cos(z x)
    cplx m6_discrete, m6_closed;
    double m6_error = 0;
    double m7_error = 0;     // for the supplied Phi1
    double m8_ratio = 0;     // |(sin(zr)/z)^{-1} + 2iz e^{izr}| e^{Im z r} / |z|
};
ResolventReport resolvent_closed_forms(cplx z, const Grid& g, const MatrixProfile& Phi1);

} // namespace cansys
