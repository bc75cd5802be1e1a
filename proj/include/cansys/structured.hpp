#pragma once

#include <string>
#include <vector>

#include "cansys/system.hpp"

namespace cansys {

// Volterra integration i int_0^x on n cells (midpoint collocation, half weight on the diagonal).
Mat volterra_calA(const Grid& g, int b);
// Assembled kernel (t - x) on the triangle; equals calA^2 + (h^2/4) I.
Mat volterra_Atilde(const Grid& g, int b);

DiscreteOperator assemble_K(const CanonicalSystem& sys, const Grid& g);

struct CoreOperators {
    Grid grid;
    int b = 1;
    DiscreteOperator calA, A, Atilde;
    double square_residual = 0; // |A - calA calA|
    double flip_residual = 0;   // |U calA U - calA^*|
};
CoreOperators core_operators(const Grid& g, int b);

// Scalar-times-identity amplitude profiles: "one", "example65" (2e^{it}-1), "exp" (e^{it}),
// "example64" (it), "cos", "expreal" (e^{t}), "linear" (t), "zero".
MatrixProfile amplitude_profile(const std::string& name, int p = 1);
MatrixProfile scalar_profile(std::function<cplx(double)> f, std::function<cplx(double)> f1,
                             std::function<cplx(double)> f2, int p, std::string name);

// Kernel of Z built from Phi1, and the full operator including the multiplication
// term (Phi1(0)Phi1(0)^* - I).
KernelFn kernel_Z_from_Phi1(const MatrixProfile& Phi1, int panels = 2, int q = 10);
DiscreteOperator operator_Z_from_Phi1(const MatrixProfile& Phi1, const Grid& g);

// Pi j Pi^* with Pi = [Phi1, I], weights absorbed.
Mat assemble_PijPi(const MatrixProfile& Phi1, const Grid& g);
double residual_identity_S4(const DiscreteOperator& Z, const Mat& PijPi);

// Psi(x,t) = 1/2 int_{|x-t|}^{x+t} R((s+x-t)/2, (s-x+t)/2) ds and Z = d/dx int d/dt Psi . dt
// on the staggered node grid.
std::function<Mat(double, double)> psi_from_R(const KernelFn& R);
DiscreteOperator Z_from_psi(const std::function<Mat(double, double)>& Psi, int b, const Grid& g);

// Sum kernel built from R0(x + t); R0 differentiable on [0, 2r].
DiscreteOperator example45_operator(const MatrixProfile& R0, const Grid& g);
Mat assemble_sum_kernel(const MatrixProfile& f, const Grid& g); // int_0^r f(x+t) . dt
double example45_residual(const MatrixProfile& R0, const Grid& g);

// Antiderivative F(x) = int_0^x f by Gauss-Legendre on [0, xmax], tabulated and
// interpolated (cubic Hermite using f as the derivative).
MatrixProfile antiderivative(const MatrixProfile& f, double xmax, int n = 512);

struct Example46 {
    DiscreteOperator S0;
    Mat rhs; // i int_t^x v0 . dt
    double residual = 0;
};
Example46 example46_operator(const MatrixProfile& v0, const Grid& g);
// upsilon on [0, 2r]: zero on [0,r], upsilon'' = v0(xi) - v0(xi - r) beyond.
MatrixProfile example46_upsilon(const MatrixProfile& v0, double r);
// Kernel i int_t^x v0 of the right-hand side.
KernelFn example46_Z_kernel(const MatrixProfile& v0, double r);

struct RankReport {
    double residual = 0;
    int rank = 0;     // of the right-hand side
    int rank_lhs = 0; // of A Z - Z A^*, same threshold
    double gap_ratio = 0;
    std::vector<double> singular_values;
};
int numerical_rank(const Mat& m, double rel = 1e-8);
RankReport example47_check(const MatrixProfile& R0, const Grid& g);

struct SFromZ {
    DiscreteOperator S;
    double identity_residual = 0; // |calA S + S calA^* - Z|
    double s34_residual = 0;
};
// Upsilon(x,t) = upsilon(x+t) - i/2 int_{x-t}^{min(x+t, 2r-x-t)} Z((x+t+s)/2, (x+t-s)/2) ds.
std::function<Mat(double, double)> upsilon_kernel(const KernelFn& Z, const std::function<Mat(double)>& upsilon,
                                                  double r);
SFromZ build_S_from_Z(const KernelFn& Z, const std::function<Mat(double)>& upsilon, const Grid& g);
// max over xi in [0,r] of |int_0^xi Z(xi - t, t) dt|.
double s34_residual(const KernelFn& Z, double r, int samples = 64);

struct TFromUpsilon {
    DiscreteOperator T;
    double identity_residual = 0; // |T calA + calA^* T - Ztilde|
    double s15_residual = 0;
};
// Kernel of U Z U: conj(Z(r - x, r - t)).
KernelFn flipped_kernel(const KernelFn& Z, double r);

TFromUpsilon build_T_from_upsilon(const KernelFn& Zt, const std::function<Mat(double)>& upsilon_t, const Grid& g);
double s15_residual(const KernelFn& Zt, double r, int samples = 64);

// max over grid nodes xi of |int_0^xi Phi(xi - t) Phi(t)^* dt - xi I|.  Trapezoid
// with the Euler-Maclaurin endpoint correction when derivative data exist.
double convolution_identity_residual(const MatrixProfile& Phi1, const Grid& g);
std::vector<Mat> convolution_defect(const MatrixProfile& Phi1, const Grid& g);
// int_0^xi Z(xi - t, t) dt compared with half the derivative of the convolution defect.
double s34_s39_linkage(const MatrixProfile& Phi1, double r, int samples = 32);

// d/dl (Pi_l^* S_l^{-1} Pi_l) by differences over prefixes; index k gives the
// estimate at the midpoint of cell k.
std::vector<Mat> hamiltonian_from_snode(const Mat& Pi, const Mat& S, const Grid& g, int b);

double s3_decomposition_residual(const Mat& S, const Mat& calA);

} // namespace cansys
