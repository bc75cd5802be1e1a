#pragma once

#include <string>
#include <vector>

#include "cansys/system.hpp"

namespace cansys {

// Ingredients of the similarity series.  u4 is m2 x m2 Hermitian, h1 is
// m2 x m, h2 is m x m2; F(s,eta) = h1(s) h2(eta).
struct SeriesData {
    MatrixProfile u4, h1, h2;
    double r = 1.0;
    std::string name;

    SeriesData() = default;
    SeriesData(MatrixProfile u4, MatrixProfile h1, MatrixProfile h2, double r, std::string name = "series");

    int b() const { return u4.rows(); }
    Mat U4(double x) const;                 // int_0^x u4
    Mat Fbreve(double t, double eta) const; // int_eta^t F(s, eta) ds
    double hermitian_defect(int samples = 64) const;
    // max(int |h1|, int |h2|, sqrt(int |u4|)); combine with sup |V1| for the bound constant.
    double data_constant() const;

private:
    MatrixProfile U4_, H1_;
};

// Named test data: "unit" (u4 = 1, F = 0), "zero", "h-only" (u4 = 0, h1 = h2 = 1),
// "mixed" (u4 = cos, h1 = [1, x], h2 = [e^{ix}; 1]).
SeriesData builtin_series(const std::string& name, double r = 1.0);

Mat series_V1(const SeriesData& d, double x, double zeta);
using Kernel2 = std::function<Mat(double, double)>;
// One step of the recursion from the previous term.
Mat series_Vk(const SeriesData& d, const Kernel2& prev, double x, double zeta, int q = 10);

// Chebyshev tensor table of a kernel on 0 <= zeta <= x <= r in the coordinates
// (x, zeta / x), evaluated by barycentric interpolation.
class TriangleTable {
public:
    TriangleTable() = default;
    TriangleTable(const Kernel2& f, double r, int b, int N);
    Mat operator()(double x, double zeta) const;
    const std::vector<double>& x_nodes() const { return xs_; }
    const std::vector<double>& s_nodes() const { return ss_; }
    const Mat& at(int i, int j) const { return v_[i * ss_.size() + j]; }

private:
    double r_ = 1;
    int b_ = 1;
    std::vector<double> xs_, ss_, wx_, ws_;
    std::vector<Mat> v_;
};

struct SeriesResult {
    std::vector<TriangleTable> terms; // terms[k-1] is V_k
    double C = 0;
    std::vector<double> max_norm;    // sup |V_k| over the table
    std::vector<double> bound_ratio; // sup |V_k| / bound, < 1 required
    bool bound_holds = false;
    Mat sum(double x, double zeta) const;
    KernelFn kernel() const; // partial sum as a triangle kernel
};
SeriesResult series_sum(const SeriesData& d, int kmax = 4, int table_n = 12);
// C (3 C^2 x)^{k-1} / (k-1)!, the bound on sup |V_k| at x.
double series_bound(double C, int k, double x);

struct V0Result {
    DiscreteOperator V0;
    std::vector<Mat> kernel; // calV0 at nodes j h
    double commutation_residual = 0; // |V0 A - A V0|
    double a45_residual = 0;         // |V0 1 - V^{-1} beta2|
};
V0Result build_V0(const DiscreteOperator& V, const MatrixProfile& beta2);
// max over (x, s) of |int_s^x a(t-s) v(x-t) dt - int_s^x a(x-t) v(t-s) dt|.
double a40_residual(const std::function<Mat(double)>& v, const std::function<double(double)>& a, double r,
                    int samples = 16);

struct NormalizedE {
    Grid grid;
    int b = 1;
    DiscreteOperator E;
    Mat Phi1;                     // E^{-1} beta1 at midpoints
    std::vector<Mat> Phi1_nodes;  // node values
    std::vector<Mat> u;           // diagonal factor estimate per cell
    Mat u0;                       // extrapolated u(0)
    double similarity_residual = 0;    // |K E - E A| / |K|
    double normalization_residual = 0; // max |E 1 - beta2|
    int nullity = 0;
    double qr_difference = -1; // |E - E_qr| when the global solve was run
    MatrixProfile phi1_profile() const;
};
// Row-by-row solve of K E = E A with E 1 = beta2.  The global block system is
// also solved by QR when n <= global_check_max to report its null space.
NormalizedE discrete_normalized_E(const CanonicalSystem& sys, const Grid& g, int global_check_max = 24);

// Profile through node samples with finite-difference derivatives.
MatrixProfile profile_from_nodes(const Grid& g, const std::vector<Mat>& v, std::string name);

struct SmoothnessReport {
    double input_defect = 0;
    double output_defect = 0;
};
// Consistency defect of midpoint samples: max |g_i - g_0 - int d1| with d1 by
// central differences, plus the same for d1 against d2.
double sample_defect(const Mat& samples, int b, const Grid& g);
SmoothnessReport smoothness_diagnostics(const DiscreteOperator& op, const MatrixProfile& f);

} // namespace cansys
