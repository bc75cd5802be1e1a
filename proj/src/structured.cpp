#include "cansys/structured.hpp"

#include <algorithm>
#include <cmath>

namespace cansys {

Mat volterra_calA(const Grid& g, int b) {
    int n = g.n;
    double h = g.h();
    Mat M = Mat::Zero(n * b, n * b);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < i; ++k) M.block(i * b, k * b, b, b) = (I1 * h) * Mat::Identity(b, b);
        M.block(i * b, i * b, b, b) = (I1 * 0.5 * h) * Mat::Identity(b, b);
    }
    return M;
}

Mat volterra_Atilde(const Grid& g, int b) {
    int n = g.n;
    double h = g.h();
    Mat M = Mat::Zero(n * b, n * b);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < i; ++k) M.block(i * b, k * b, b, b) = (-(i - k) * h * h) * Mat::Identity(b, b);
    return M;
}

DiscreteOperator assemble_K(const CanonicalSystem& sys, const Grid& g) {
    Mat s = sys.signature();
    KernelFn k;
    k.b = sys.m2();
    k.domain = KernelDomain::triangle;
    k.k = [&sys, s](double x, double t) -> Mat { return I1 * sys.beta.value(x) * s * sys.beta.value(t).adjoint(); };
    return assemble_integral_operator(k, g);
}

CoreOperators core_operators(const Grid& g, int b) {
    CoreOperators c;
    c.grid = g;
    c.b = b;
    c.calA = {g, b, volterra_calA(g, b), Structure::lower};
    c.A = {g, b, c.calA.M * c.calA.M, Structure::lower};
    c.Atilde = {g, b, volterra_Atilde(g, b), Structure::lower};
    c.square_residual = (c.A.M - c.calA.M * c.calA.M).norm();
    c.flip_residual = (flip_conjugate(c.calA).M - c.calA.M.adjoint()).norm();
    return c;
}

MatrixProfile scalar_profile(std::function<cplx(double)> f, std::function<cplx(double)> f1,
                             std::function<cplx(double)> f2, int p, std::string name) {
    auto wrap = [p](std::function<cplx(double)> u) -> MatrixProfile::Fn {
        if (!u) return {};
        return [u, p](double x) { return Mat(u(x) * Mat::Identity(p, p)); };
    };
    return MatrixProfile(p, p, wrap(f), wrap(f1), wrap(f2), std::move(name));
}

MatrixProfile amplitude_profile(const std::string& name, int p) {
    if (name == "one")
        return scalar_profile([](double) { return cplx(1); }, [](double) { return cplx(0); },
                              [](double) { return cplx(0); }, p, name);
    if (name == "example65")
        return scalar_profile([](double t) { return 2.0 * std::exp(I1 * t) - 1.0; },
                              [](double t) { return 2.0 * I1 * std::exp(I1 * t); },
                              [](double t) { return -2.0 * std::exp(I1 * t); }, p, name);
    if (name == "exp")
        return scalar_profile([](double t) { return std::exp(I1 * t); }, [](double t) { return I1 * std::exp(I1 * t); },
                              [](double t) { return -std::exp(I1 * t); }, p, name);
    if (name == "example64")
        return scalar_profile([](double t) { return I1 * t; }, [](double) { return I1; }, [](double) { return cplx(0); },
                              p, name);
    if (name == "cos")
        return scalar_profile([](double t) { return cplx(std::cos(t)); }, [](double t) { return cplx(-std::sin(t)); },
                              [](double t) { return cplx(-std::cos(t)); }, p, name);
    if (name == "expreal")
        return scalar_profile([](double t) { return cplx(std::exp(t)); }, [](double t) { return cplx(std::exp(t)); },
                              [](double t) { return cplx(std::exp(t)); }, p, name);
    if (name == "linear")
        return scalar_profile([](double t) { return cplx(t); }, [](double) { return cplx(1); },
                              [](double) { return cplx(0); }, p, name);
    if (name == "zero")
        return scalar_profile([](double) { return cplx(0); }, [](double) { return cplx(0); },
                              [](double) { return cplx(0); }, p, name);
    throw DomainError("unknown amplitude profile '" + name + "'");
}

KernelFn kernel_Z_from_Phi1(const MatrixProfile& Phi1, int panels, int q) {
    if (!Phi1.has_d1()) throw DomainError("kernel_Z_from_Phi1: Phi1 needs derivative data");
    KernelFn k;
    k.b = Phi1.rows();
    k.domain = KernelDomain::square;
    Mat P0 = Phi1.value(0.0), D0 = Phi1.d1(0.0);
    k.k = [Phi1, P0, D0, panels, q](double x, double t) -> Mat {
        double mn = std::min(x, t);
        Mat v;
        if (x > t)
            v = Phi1.d1(x - t) * P0.adjoint();
        else if (t > x)
            v = P0 * Phi1.d1(t - x).adjoint();
        else
            v = 0.5 * (D0 * P0.adjoint() + P0 * D0.adjoint());
        if (mn > 0)
            v += integrate([&](double z) { return Mat(Phi1.d1(x - z) * Phi1.d1(t - z).adjoint()); }, 0.0, mn, panels, q);
        return v;
    };
    return k;
}

DiscreteOperator operator_Z_from_Phi1(const MatrixProfile& Phi1, const Grid& g) {
    auto Z = assemble_integral_operator(kernel_Z_from_Phi1(Phi1), g);
    Mat P0 = Phi1.value(0.0);
    int b = Phi1.rows();
    Mat extra = P0 * P0.adjoint() - Mat::Identity(b, b);
    if (extra.norm() > 0)
        for (int i = 0; i < g.n; ++i) Z.M.block(i * b, i * b, b, b) += extra;
    return Z;
}

Mat assemble_PijPi(const MatrixProfile& Phi1, const Grid& g) {
    int b = Phi1.rows(), n = g.n;
    double h = g.h();
    Mat F = sample_mid(Phi1, g); // n b x m1
    Mat M = h * (F * F.adjoint());
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) M.block(i * b, k * b, b, b) -= h * Mat::Identity(b, b);
    return M;
}

double residual_identity_S4(const DiscreteOperator& Z, const Mat& PijPi) {
    Mat cA = volterra_calA(Z.grid, Z.b);
    return op_norm(cA * Z.M - Z.M * cA.adjoint() - I1 * PijPi);
}

std::function<Mat(double, double)> psi_from_R(const KernelFn& R) {
    return [R](double x, double t) -> Mat {
        double lo = std::abs(x - t), hi = x + t;
        if (hi <= lo) return Mat::Zero(R.b, R.b);
        return Mat(0.5 * integrate([&](double s) { return R.k((s + x - t) / 2, (s - x + t) / 2); }, lo, hi, 2, 10));
    };
}

namespace {

Mat staggered(const std::function<Mat(double, double)>& F, int b, const Grid& g) {
    int n = g.n;
    double h = g.h();
    std::vector<Mat> P((n + 1) * (n + 1));
    for (int i = 0; i <= n; ++i)
        for (int k = 0; k <= n; ++k) P[i * (n + 1) + k] = F(g.node(i), g.node(k));
    auto at = [&](int i, int k) -> const Mat& { return P[i * (n + 1) + k]; };
    Mat M(n * b, n * b);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            M.block(i * b, k * b, b, b) = (at(i + 1, k + 1) - at(i + 1, k) - at(i, k + 1) + at(i, k)) / h;
    return M;
}

KernelFn square_kernel(int b, std::function<Mat(double, double)> f) {
    KernelFn k;
    k.b = b;
    k.domain = KernelDomain::square;
    k.k = std::move(f);
    return k;
}

// Integral over [a, c] split at the points in `cuts` that fall inside.
Mat split_integral(const std::function<Mat(double)>& f, double a, double c, std::initializer_list<double> cuts,
                   int rows, int cols) {
    if (c <= a) return Mat::Zero(rows, cols);
    std::vector<double> pts{a};
    for (double p : cuts)
        if (p > a && p < c) pts.push_back(p);
    pts.push_back(c);
    std::sort(pts.begin(), pts.end());
    Mat acc = Mat::Zero(rows, cols);
    for (size_t i = 0; i + 1 < pts.size(); ++i) acc += integrate(f, pts[i], pts[i + 1], 2, 10);
    return acc;
}

} // namespace

DiscreteOperator Z_from_psi(const std::function<Mat(double, double)>& Psi, int b, const Grid& g) {
    return {g, b, staggered(Psi, b, g), Structure::general};
}

DiscreteOperator example45_operator(const MatrixProfile& R0, const Grid& g) {
    if (!R0.has_d1()) throw DomainError("example45_operator: R0 needs derivative data");
    int b = R0.rows();
    auto Z = assemble_integral_operator(
        square_kernel(b, [R0](double x, double t) { return Mat(0.5 * (R0.d1(x + t) + R0.d1(std::abs(x - t)))); }), g);
    Mat c0 = R0.value(0.0);
    for (int i = 0; i < g.n; ++i) Z.M.block(i * b, i * b, b, b) += c0;
    return Z;
}

Mat assemble_sum_kernel(const MatrixProfile& f, const Grid& g) {
    return assemble_integral_operator(square_kernel(f.rows(), [f](double x, double t) { return f.value(x + t); }), g).M;
}

double example45_residual(const MatrixProfile& R0, const Grid& g) {
    auto Z = example45_operator(R0, g);
    Mat cA = volterra_calA(g, Z.b);
    Mat R = assemble_sum_kernel(R0, g);
    return op_norm(cA * Z.M - Z.M * cA.adjoint() - I1 * R);
}

MatrixProfile antiderivative(const MatrixProfile& f, double xmax, int n) {
    std::vector<double> x(n + 1);
    std::vector<Mat> F(n + 1), d(n + 1), dd;
    double h = xmax / n;
    F[0] = Mat::Zero(f.rows(), f.cols());
    for (int i = 0; i <= n; ++i) {
        x[i] = i * h;
        d[i] = f.value(x[i]);
        if (i > 0) F[i] = F[i - 1] + integrate([&](double s) { return f.value(s); }, x[i - 1], x[i], 1, 8);
    }
    if (f.has_d1())
        for (int i = 0; i <= n; ++i) dd.push_back(f.d1(x[i]));
    return MatrixProfile::sampled(x, F, d, dd, "antiderivative(" + f.provenance() + ")");
}

KernelFn example46_Z_kernel(const MatrixProfile& v0, double r) {
    auto V = antiderivative(v0, 2 * r);
    return square_kernel(v0.rows(), [V](double x, double t) { return Mat(I1 * (V.value(x) - V.value(t))); });
}

Example46 example46_operator(const MatrixProfile& v0, const Grid& g) {
    Example46 e;
    int b = v0.rows();
    e.S0 = {g, b, assemble_sum_kernel(v0, g), Structure::general};
    e.rhs = assemble_integral_operator(example46_Z_kernel(v0, g.r), g).M;
    Mat cA = volterra_calA(g, b);
    e.residual = op_norm(cA * e.S0.M + e.S0.M * cA.adjoint() - e.rhs);
    return e;
}

MatrixProfile example46_upsilon(const MatrixProfile& v0, double r) {
    auto V = antiderivative(v0, 2 * r);
    auto W = antiderivative(V, 2 * r);
    int b = v0.rows();
    Mat Z = Mat::Zero(b, b);
    Mat Wr = W.value(r);
    return MatrixProfile(
        b, b,
        [=](double xi) { return xi <= r ? Z : Mat(W.value(xi) - Wr - W.value(xi - r)); },
        [=](double xi) { return xi <= r ? Z : Mat(V.value(xi) - V.value(xi - r)); },
        [=](double xi) { return xi <= r ? Z : Mat(v0.value(xi) - v0.value(xi - r)); }, "example46_upsilon");
}

int numerical_rank(const Mat& m, double rel) {
    Eigen::JacobiSVD<Mat> svd(m);
    auto s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0) return 0;
    int k = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > rel * s(0)) ++k;
    return k;
}

RankReport example47_check(const MatrixProfile& R0, const Grid& g) {
    RankReport rep;
    int b = R0.rows();
    auto Z = example45_operator(R0, g);
    Mat cA = volterra_calA(g, b);
    Mat A = cA * cA;
    Mat lhs = A * Z.M - Z.M * A.adjoint();
    auto Q = antiderivative(R0, g.r);
    Mat rhs = assemble_integral_operator(
                  square_kernel(b, [Q](double x, double t) { return Mat(-(Q.value(x) - Q.value(t))); }), g)
                  .M;
    rep.residual = op_norm(lhs - rhs);
    Eigen::JacobiSVD<Mat> svd(rhs);
    auto s = svd.singularValues();
    for (int i = 0; i < std::min<int>(s.size(), 8); ++i) rep.singular_values.push_back(s(i));
    rep.rank = numerical_rank(rhs);
    rep.rank_lhs = numerical_rank(lhs);
    int k = 2 * b;
    if (s.size() > k) {
        double lo = s(k), hi = s(k - 1);
        rep.gap_ratio = lo > 0 ? hi / lo : INFINITY;
    }
    return rep;
}

std::function<Mat(double, double)> upsilon_kernel(const KernelFn& Z, const std::function<Mat(double)>& upsilon,
                                                  double r) {
    return [Z, upsilon, r](double x, double t) -> Mat {
        double a = x - t, c = std::min(x + t, 2 * r - x - t);
        double sum = x + t;
        Mat v = upsilon ? upsilon(sum) : Mat::Zero(Z.b, Z.b);
        Mat w = split_integral([&](double s) { return Z.k((sum + s) / 2, (sum - s) / 2); }, a, c, {0.0}, Z.b, Z.b);
        return Mat(v - 0.5 * I1 * w);
    };
}

SFromZ build_S_from_Z(const KernelFn& Z, const std::function<Mat(double)>& upsilon, const Grid& g) {
    SFromZ out;
    out.S = {g, Z.b, staggered(upsilon_kernel(Z, upsilon, g.r), Z.b, g), Structure::general};
    Mat cA = volterra_calA(g, Z.b);
    Mat Zm = assemble_integral_operator(Z, g).M;
    out.identity_residual = op_norm(cA * out.S.M + out.S.M * cA.adjoint() - Zm);
    out.s34_residual = s34_residual(Z, g.r);
    return out;
}

double s34_residual(const KernelFn& Z, double r, int samples) {
    double worst = 0;
    for (int i = 1; i <= samples; ++i) {
        double xi = r * i / samples;
        Mat v = split_integral([&](double t) { return Z.k(xi - t, t); }, 0.0, xi, {xi / 2}, Z.b, Z.b);
        worst = std::max(worst, v.norm());
    }
    return worst;
}

KernelFn flipped_kernel(const KernelFn& Z, double r) {
    KernelFn out;
    out.b = Z.b;
    out.domain = KernelDomain::square;
    auto k = Z.k;
    out.k = [k, r](double x, double t) { return Mat(k(r - x, r - t).conjugate()); };
    if (Z.diag || Z.domain == KernelDomain::triangle) {
        KernelFn src = Z;
        out.diag = [src, r](double x) { return Mat(src.on_diag(r - x).conjugate()); };
    }
    if (Z.domain == KernelDomain::triangle) {
        int b = Z.b;
        out.k = [k, r, b](double x, double t) {
            return t < x ? Mat(Mat::Zero(b, b)) : Mat(k(r - x, r - t).conjugate());
        };
    }
    return out;
}

TFromUpsilon build_T_from_upsilon(const KernelFn& Zt, const std::function<Mat(double)>& upsilon_t, const Grid& g) {
    double r = g.r;
    auto Ups = [Zt, upsilon_t, r](double x, double t) -> Mat {
        double sum = x + t;
        double a = -std::min(sum, 2 * r - sum), c = x - t;
        Mat v = upsilon_t ? upsilon_t(sum) : Mat::Zero(Zt.b, Zt.b);
        Mat w = split_integral([&](double s) { return Zt.k((sum + s) / 2, (sum - s) / 2); }, a, c, {0.0}, Zt.b, Zt.b);
        return Mat(v + 0.5 * I1 * w);
    };
    TFromUpsilon out;
    out.T = {g, Zt.b, staggered(Ups, Zt.b, g), Structure::general};
    Mat cA = volterra_calA(g, Zt.b);
    Mat Zm = assemble_integral_operator(Zt, g).M;
    out.identity_residual = op_norm(out.T.M * cA + cA.adjoint() * out.T.M - Zm);
    out.s15_residual = s15_residual(Zt, r);
    return out;
}

double s15_residual(const KernelFn& Zt, double r, int samples) {
    double worst = 0;
    for (int i = 0; i < samples; ++i) {
        double xi = r + r * i / samples;
        Mat v = split_integral([&](double t) { return Zt.k(xi - t, t); }, xi - r, r, {xi / 2}, Zt.b, Zt.b);
        worst = std::max(worst, v.norm());
    }
    return worst;
}

std::vector<Mat> convolution_defect(const MatrixProfile& Phi1, const Grid& g) {
    int n = g.n, b = Phi1.rows();
    double h = g.h();
    auto P = sample_nodes(Phi1, g);
    std::vector<Mat> D;
    bool d1 = Phi1.has_d1();
    std::vector<Mat> P1;
    if (d1)
        for (double x : g.nodes()) P1.push_back(Phi1.d1(x));
    Mat Id = Mat::Identity(b, b);
    for (int i = 0; i <= n; ++i) {
        Mat acc = Mat::Zero(b, b);
        for (int j = 0; j <= i; ++j) {
            double w = (j == 0 || j == i) ? 0.5 * h : h;
            if (i == 0) w = 0;
            acc += w * (P[i - j] * P[j].adjoint());
        }
        if (d1 && i > 0) {
            Mat gx = -P1[0] * P[i].adjoint() + P[0] * P1[i].adjoint();
            Mat g0 = -P1[i] * P[0].adjoint() + P[i] * P1[0].adjoint();
            acc -= (h * h / 12.0) * (gx - g0);
        }
        D.push_back(acc - g.node(i) * Id);
    }
    return D;
}

double convolution_identity_residual(const MatrixProfile& Phi1, const Grid& g) {
    double worst = 0;
    for (const Mat& d : convolution_defect(Phi1, g)) worst = std::max(worst, d.norm());
    return worst;
}

double s34_s39_linkage(const MatrixProfile& Phi1, double r, int samples) {
    auto Z = kernel_Z_from_Phi1(Phi1);
    int b = Phi1.rows();
    auto C = [&](double xi) -> Mat {
        if (xi <= 0) return Mat::Zero(b, b);
        Mat v = integrate([&](double t) { return Mat(Phi1.value(xi - t) * Phi1.value(t).adjoint()); }, 0.0, xi, 4, 12);
        return Mat(v - xi * Mat::Identity(b, b));
    };
    double worst = 0, d = 1e-4 * r;
    for (int i = 1; i < samples; ++i) {
        double xi = r * i / samples;
        Mat r34 = split_integral([&](double t) { return Z.k(xi - t, t); }, 0.0, xi, {xi / 2}, b, b);
        Mat dC = (C(xi + d) - C(xi - d)) / (2 * d);
        worst = std::max(worst, (r34 - 0.5 * dC).norm());
    }
    return worst;
}

std::vector<Mat> hamiltonian_from_snode(const Mat& Pi, const Mat& S, const Grid& g, int b) {
    int n = g.n;
    double h = g.h();
    int m = Pi.cols();
    std::vector<Mat> G(n + 1, Mat::Zero(m, m));
    for (int k = 1; k <= n; ++k) {
        Eigen::LDLT<Mat> ldlt(S.topLeftCorner(k * b, k * b));
        if (ldlt.info() != Eigen::Success) throw SingularError("hamiltonian_from_snode: S_l not positive", 0.0);
        Mat Pk = Pi.topRows(k * b);
        G[k] = h * (Pk.adjoint() * ldlt.solve(Pk));
    }
    std::vector<Mat> H;
    for (int k = 0; k < n; ++k) H.push_back((G[k + 1] - G[k]) / h);
    return H;
}

double s3_decomposition_residual(const Mat& S, const Mat& calA) {
    Mat A = calA * calA;
    Mat X = calA * S + S * calA.adjoint();
    return ((A * S - S * A.adjoint()) - (calA * X - X * calA.adjoint())).norm();
}

} // namespace cansys
