#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cansys/types.hpp"

namespace cansys {

// Uniform partition of [0,r] into n cells.
//
// Profiles are sampled at the nodes x_i = i h (trapezoid weights), while
// discrete operators collocate at the cell midpoints (i + 1/2) h with weight h.
struct Grid {
    double r = 1.0;
    int n = 2;

    Grid() = default;
    Grid(double r_, int n_);

    double h() const { return r / n; }
    double node(int i) const { return i * h(); }
    double mid(int i) const { return (i + 0.5) * h(); }
    std::vector<double> nodes() const;
    std::vector<double> mids() const;
    std::vector<double> trapezoid_weights() const;
    // First k cells as a grid on [0, k h].
    Grid prefix(int k) const;
};

struct GaussRule {
    std::vector<double> x, w; // on [-1, 1]
};
const GaussRule& gauss_legendre(int q);

// Composite Gauss-Legendre quadrature of a matrix-valued function on [a,b].
Mat integrate(const std::function<Mat(double)>& f, double a, double b, int panels = 4, int q = 12);
cplx integrate_scalar(const std::function<cplx(double)>& f, double a, double b, int panels = 4, int q = 12);

class MatrixProfile {
public:
    using Fn = std::function<Mat(double)>;

    MatrixProfile() = default;
    MatrixProfile(int rows, int cols, Fn value, Fn d1 = {}, Fn d2 = {}, std::string provenance = "builtin");

    static MatrixProfile constant(const Mat& c, std::string provenance = "constant");
    // Cubic Hermite interpolation of node samples; d2 samples (if any) are
    // interpolated linearly.
    static MatrixProfile sampled(std::vector<double> x, std::vector<Mat> v, std::vector<Mat> d1,
                                 std::vector<Mat> d2, std::string provenance);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool has_d1() const { return static_cast<bool>(d1_); }
    bool has_d2() const { return static_cast<bool>(d2_); }
    const std::string& provenance() const { return prov_; }

    Mat value(double x) const { return v_(x); }
    Mat d1(double x) const;
    Mat d2(double x) const;

    MatrixProfile block(int r0, int c0, int nr, int nc) const;
    MatrixProfile adjoint() const;
    MatrixProfile operator*(const Mat& right) const;

private:
    int rows_ = 0, cols_ = 0;
    Fn v_, d1_, d2_;
    std::string prov_;
};

// Defects at even grid nodes from nodal data only, fourth order in h: the
// endpoint-corrected trapezoid when d2 exists, a Richardson step otherwise.
struct ConsistencyReport {
    double value_defect = 0; // max |f(x) - f(0) - int_0^x f'|
    double d1_defect = 0;    // same for f' and f''
    bool has_d2 = false;
};
ConsistencyReport check_consistency(const MatrixProfile& f, const Grid& g);

struct SignatureSpec {
    int m1 = 1, m2 = 1;
    int m() const { return m1 + m2; }
    Mat j() const;
    Mat J() const;     // requires m1 == m2
    Mat Theta() const; // requires m1 == m2
};

enum class KernelDomain { square, triangle };
enum class Structure { general, lower, convolution, multiplication };

// Matrix kernel k(x,t) of size b x b.  `diag` gives the value used on x = t
// (for kernels with a jump across the diagonal this should be the mean of the
// one-sided limits).  Triangle kernels are zero for t > x.
struct KernelFn {
    int b = 1;
    KernelDomain domain = KernelDomain::square;
    std::function<Mat(double, double)> k;
    std::function<Mat(double)> diag;

    Mat on_diag(double x) const { return diag ? diag(x) : k(x, x); }
};

// Dense operator on b-vector functions sampled at the n cell midpoints.
// Weights are absorbed: (Of)_i = sum_k M_ik f_k.
struct DiscreteOperator {
    Grid grid;
    int b = 1;
    Mat M;
    Structure tag = Structure::general;

    int dim() const { return grid.n * b; }
    Mat apply(const Mat& f) const { return M * f; }
};

DiscreteOperator identity_operator(const Grid& g, int b);
DiscreteOperator multiplication_operator(const MatrixProfile& m, const Grid& g);
DiscreteOperator assemble_integral_operator(const KernelFn& kernel, const Grid& g);

DiscreteOperator operator_compose(const DiscreteOperator& a, const DiscreteOperator& b);
DiscreteOperator operator_adjoint(const DiscreteOperator& a);
DiscreteOperator operator_sum(const DiscreteOperator& a, const DiscreteOperator& b, cplx sb = 1.0);
struct InverseResult {
    DiscreteOperator inv;
    double rcond;
};
InverseResult operator_inverse(const DiscreteOperator& a, double min_rcond = 1e-13);

// The conjugate-linear flip (Uf)(x) = conj(f(r - x)) on samples, and the
// conjugation O -> U O U.
Mat flip(const Mat& f, int b);
DiscreteOperator flip_conjugate(const DiscreteOperator& a);

// Weighted inner product <f, g> = sum_i h g_i^* f_i, as a q_g x q_f matrix.
Mat inner(const Mat& f, const Mat& g, const Grid& grid);
double op_norm(const Mat& m);

// Samples of a profile stacked as (n*rows) x cols.
Mat sample_mid(const MatrixProfile& f, const Grid& g);
std::vector<Mat> sample_nodes(const MatrixProfile& f, const Grid& g);
Mat cell(const Mat& samples, int i, int b);

// Node values from midpoint samples: given value at 0, midpoint averages
// in the interior and linear extrapolation at r.
std::vector<Mat> mid_to_nodes(const Mat& samples, int b, const Mat& at_zero);

} // namespace cansys
