#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cansys/numgrid.hpp"

namespace cansys {

// z with z^2 = lam in the open first quadrant.
cplx branch_sqrt(cplx lam);

struct RaySamples {
    double theta = M_PI / 4;
    std::vector<cplx> z;
    std::vector<Mat> phi; // phi(z^2), or phihat in the hat case
    double r = 1.0;
    bool hat = false;
};

// count points with |z| log-spaced in [zmin, zmax] on arg z = theta.
std::vector<cplx> ray_points(double theta, double zmin, double zmax, int count);
RaySamples sample_ray(const std::function<Mat(cplx lam)>& phi, double r, bool hat, const std::vector<cplx>& z,
                      double theta = M_PI / 4);

// Laplace-type weights: int_0^T e^{izt} f(t) dt = sum_j w_j f_j for f piecewise
// linear through nodes j h, j = 0..N.
std::vector<cplx> filon_weights(cplx z, double h, int N);
cplx filon_integral(cplx z, double h, const std::vector<cplx>& f);

// iz int_0^r e^{izt} Phi1(t) dt (hat: -z int ...), Phi1 given at nodes j h.
Mat main_term(const std::vector<Mat>& phi_nodes, double h, cplx z, bool hat = false);
Mat main_term(const MatrixProfile& Phi1, double r, int n, cplx z, bool hat = false);

struct AsymptoticsReport {
    std::vector<cplx> z;
    std::vector<double> rho, envelope, floor;
    std::vector<bool> resolved;
    int n_resolved = 0;
    double envelope_constant = 0; // max envelope over resolved samples
    double inner_max = 0, outer_max = 0;
    bool bounded = false, decreasing = false, pass = false;
    std::string note;
};
// rho_k = |phi - main term|, envelope rho_k e^{Im z r} / |z|.  A sample is
// resolved when rho_k exceeds 100 x its error floor (Richardson estimate of the
// quadrature error plus rounding at the scale of phi).  Boundedness compares the
// outer half of the resolved samples with the inner half; decay is required to be
// monotone on the outer half and rho_last < rho_first.
AsymptoticsReport verify_asymptotics(const RaySamples& s, const std::vector<Mat>& phi_nodes, double h,
                                     double kappa_b = 10.0);

struct AmplitudeEstimate {
    Grid grid;                 // [0, r]
    std::vector<Mat> values;   // Phi1 at grid nodes
    double window = 0;         // fit window [0, window]
    double reg = 0;
    double misfit = 0;         // |D x - y|^2
    double fit_residual = 0;   // misfit + reg |L x|^2
    double condition = 0;      // rcond of the regularized system
    double s39_residual = -1;  // convolution identity of the estimate (flat case)
    int samples = 0;
    MatrixProfile profile() const;
    // L2 distance to f on [0, frac r] (trapezoid on the grid).
    double l2_error(const std::function<Mat(double)>& f, double frac = 0.8) const;
    double max_error(const std::function<Mat(double)>& f, double frac = 1.0) const;
};
struct ExtractOptions {
    double kappa = 4.0;          // window = kappa r
    bool tail = true;            // linear continuation beyond the window (semi-axis data)
    double reg_scale = 1e-8;     // reg = reg_scale |D|^2 when reg < 0
    double reg = -1;
    double min_rcond = 1e-15;
};
AmplitudeEstimate extract_phi1(const RaySamples& s, int n, const ExtractOptions& opt = {});
// Suggested sample count for extract_phi1 at n cells: 2 * unknowns + 40.
int extraction_sample_count(int n, double kappa = 4.0);

struct UniquenessReport {
    std::vector<cplx> z;
    std::vector<double> omega;
    double max_omega = 0;
    double l2_difference = 0;
    bool separated = false;
};
// omega(z) = int_0^r e^{iz(t-r)} (Phi_a - Phi_b) dt.
UniquenessReport uniqueness_probe(const std::function<Mat(double)>& a, const std::function<Mat(double)>& b, double r,
                                  const std::vector<cplx>& z, double tol = 1e-8);

// Exact semi-axis Weyl functions of the builtin examples, as functions of lam.
// "example65": (1 - z)/(1 + z); "example64": i/z (hat); "example23": zeta1(lam).
std::function<Mat(cplx)> builtin_weyl(const std::string& name, int p = 1);

} // namespace cansys
