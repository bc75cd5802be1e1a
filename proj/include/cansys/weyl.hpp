#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cansys/system.hpp"

namespace cansys {

struct PropertyJPair {
    std::function<Mat(cplx)> P1, P2;
    std::string provenance = "constant";
};

PropertyJPair constant_pair(const Mat& P1, const Mat& P2);
// P1 = e^{-icr} I, P2 = e^{icr} zeta1(lam) alpha.
PropertyJPair example23_pair(double r, const Mat& alpha, double c = 0.5);

struct PairCheck {
    double min_nondegeneracy = 0; // min eig of P1^*P1 + P2^*P2
    double min_signature = 0;     // min eig of [P1;P2]^* sig [P1;P2], relative
    bool pass = false;
};
PairCheck check_pair(const PropertyJPair& pair, const Mat& sig, cplx lam);

// (W21 P1 + W22 P2)(W11 P1 + W12 P2)^{-1}, times i in the hat case.
// Winv is the inverse fundamental solution at r.
Mat mobius(const Mat& Winv, const Mat& P1, const Mat& P2, bool hat = false, double min_rcond = 1e-12);

// Smallest eigenvalue of [I, phi^*] W^* sig W [I; phi]; hat: [I, i phi^*] W^* J W [I; -i phi].
double disk_inequality_residual(const Mat& W, const Mat& phi, const Mat& sig, bool hat = false);

struct WeylSample {
    std::vector<cplx> lams;
    std::vector<Mat> phi;
    std::vector<double> min_eig;
    std::vector<bool> singular; // isolated Mobius singularities
    double r = 0;
    bool hat = false;
    std::string provenance;
};

// Default test set: Re lam in {-5,-2.5,0,2.5,5}, Im lam log-spaced over [0.1, 10].
std::vector<cplx> default_lambda_grid();

// phi(r, lam) from the integrated fundamental solution on n cells.
WeylSample weyl_samples(const CanonicalSystem& sys, const PropertyJPair& pair, const std::vector<cplx>& lams, double r,
                        int n);

double contraction_norm(const Mat& phi);
double herglotz_min_eig(const Mat& phihat); // min eig of (phi - phi^*)/(2i)

struct NestednessReport {
    std::vector<double> min_eig_r1, min_eig_r2;
    double worst = 0;
    bool pass = false;
    std::string certified; // which finite r-set was checked
};
// Builds phi at r2 (or uses `phi` if given) and checks the disk form at r1 and r2.
NestednessReport nestedness_check(const CanonicalSystem& sys, const PropertyJPair& pair, double r1, double r2,
                                  const std::vector<cplx>& lams, int n, double tol = 1e-8,
                                  const std::function<Mat(cplx)>& phi = {});

struct SummabilityReport {
    std::vector<double> R, I; // trace of the partial integral
    std::vector<double> increment_ratio;
    bool bounded = false;
};
SummabilityReport summability_partial(const CanonicalSystem& sys, const Mat& phi, cplx lam, const std::vector<double>& R,
                                      int cells_per_unit = 256);

Mat cayley(const Mat& phi);
Mat cayley_inverse(const Mat& phihat);

} // namespace cansys
