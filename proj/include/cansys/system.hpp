#pragma once

#include <map>
#include <string>
#include <vector>

#include "cansys/numgrid.hpp"

namespace cansys {

// w' = i lam j H w with H = beta^* beta.  With `hat` set the signature is J
// (the standard form with m1 = m2 = p).
struct CanonicalSystem {
    SignatureSpec sig;
    MatrixProfile beta; // m2 x m
    double r = 1.0;
    bool hat = false;
    std::string name = "custom";

    int m() const { return sig.m(); }
    int m2() const { return sig.m2; }
    Mat signature() const { return hat ? sig.J() : sig.j(); }
    Mat H(double x) const;
    MatrixProfile beta1() const { return beta.block(0, 0, sig.m2, sig.m1); }
    MatrixProfile beta2() const { return beta.block(0, sig.m1, sig.m2, sig.m2); }
};

struct ValidationReport {
    double flat_residual = 0;  // max |beta j beta^*|
    double deriv_residual = 0; // max |beta' j beta^* - i I|
    double min_eig_H = 0;      // relative to |H|
    ConsistencyReport consistency;
    double tol = 1e-12;
    bool pass = false;
};
ValidationReport validate_beta(const CanonicalSystem& sys, const Grid& g, double tol = 1e-12);

struct FundamentalSolution {
    cplx lam;
    Mat sig;
    std::vector<double> x;
    std::vector<Mat> W;
    std::string method;
    Mat Winv;                  // sig W(r, conj lam)^* sig
    double j_residual = 0;     // |W(r, conj lam)^* sig W(r, lam) - sig|
    double inverse_residual = 0;

    const Mat& end() const { return W.back(); }
};

// Midpoint exponential stepper W_{k+1} = exp(i lam sig H(x_{k+1/2}) h) W_k.
FundamentalSolution integrate_fundamental(const CanonicalSystem& sys, cplx lam, const Grid& g);
FundamentalSolution integrate_fundamental(const std::function<Mat(double)>& H, const Mat& sig, cplx lam,
                                          const Grid& g);

// Max over cells of |d/dx(W^* sig W) - i(lam - conj lam) W^* H W| by central differences.
double flux_residual(const CanonicalSystem& sys, cplx lam, const Grid& g);

struct QuadraticRoots {
    cplx zeta1, zeta2, sqrt_disc;
    bool double_root = false;
    bool real_axis_branch = false; // lam + 1/4 on the negative real axis
};

// Square root with Im >= 0 (first quadrant for arguments in the upper half-plane).
cplx upper_sqrt(cplx w);
QuadraticRoots quadratic_roots(cplx lam);

// Closed forms on the nodes xs.  The example23 form takes a p x p unitary alpha.
FundamentalSolution closed_form_example23(const std::vector<double>& xs, cplx lam, const Mat& alpha, double c = 0.5);
FundamentalSolution closed_form_example64(const std::vector<double>& xs, cplx lam, int p = 1);

// Builtin systems.  Parameters (all optional):
//   example23: p, alpha_phase (alpha = e^{i phase} I), c
//   example64, example65: p
//   admissible: a, b, theta_rate, tail_eps, tail_ell  (m1 = m2 = 1)
//   constant: the invalid profile beta = [1, 1]
CanonicalSystem builtin_system(const std::string& name, double r, const std::map<std::string, double>& par = {});
std::vector<std::string> builtin_names();

} // namespace cansys
