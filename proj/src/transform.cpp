#include "cansys/transform.hpp"

#include <algorithm>
#include <cmath>

#include "cansys/structured.hpp"

namespace cansys {

SeriesData::SeriesData(MatrixProfile u4_, MatrixProfile h1_, MatrixProfile h2_, double r_, std::string name_)
    : u4(std::move(u4_)), h1(std::move(h1_)), h2(std::move(h2_)), r(r_), name(std::move(name_)) {
    if (u4.rows() != u4.cols()) throw DomainError("series data: u4 must be square");
    if (h1.rows() != u4.rows() || h2.cols() != u4.rows() || h1.cols() != h2.rows())
        throw DomainError("series data: h1 must be m2 x m and h2 m x m2");
    U4_ = antiderivative(u4, r);
    H1_ = antiderivative(h1, r);
}

Mat SeriesData::U4(double x) const { return U4_.value(x); }

Mat SeriesData::Fbreve(double t, double eta) const { return (H1_.value(t) - H1_.value(eta)) * h2.value(eta); }

double SeriesData::hermitian_defect(int samples) const {
    double worst = 0;
    for (int i = 0; i <= samples; ++i) {
        Mat v = u4.value(r * i / samples);
        worst = std::max(worst, (v - v.adjoint()).norm());
    }
    return worst;
}

double SeriesData::data_constant() const {
    auto l1 = [this](const MatrixProfile& f) {
        return integrate_scalar([&](double t) { return cplx(op_norm(f.value(t))); }, 0.0, r, 8, 12).real();
    };
    return std::max({l1(h1), l1(h2), std::sqrt(l1(u4))});
}

namespace {
MatrixProfile mat_profile(int rows, int cols, std::function<Mat(double)> f, std::string name) {
    return MatrixProfile(rows, cols, std::move(f), {}, {}, std::move(name));
}
} // namespace

SeriesData builtin_series(const std::string& name, double r) {
    if (name == "unit")
        return {MatrixProfile::constant(Mat::Identity(1, 1)), MatrixProfile::constant(Mat::Zero(1, 2)),
                MatrixProfile::constant(Mat::Zero(2, 1)), r, name};
    if (name == "zero")
        return {MatrixProfile::constant(Mat::Zero(1, 1)), MatrixProfile::constant(Mat::Zero(1, 2)),
                MatrixProfile::constant(Mat::Zero(2, 1)), r, name};
    if (name == "h-only")
        return {MatrixProfile::constant(Mat::Zero(1, 1)), MatrixProfile::constant(Mat::Ones(1, 1)),
                MatrixProfile::constant(Mat::Ones(1, 1)), r, name};
    if (name == "mixed") {
        auto u4 = mat_profile(1, 1, [](double t) { return Mat::Constant(1, 1, std::cos(t)); }, "cos");
        auto h1 = mat_profile(1, 2, [](double t) {
            Mat m(1, 2);
            m << 1.0, t;
            return m;
        }, "h1");
        auto h2 = mat_profile(2, 1, [](double t) {
            Mat m(2, 1);
            m << std::exp(I1 * t), 1.0;
            return m;
        }, "h2");
        return {u4, h1, h2, r, name};
    }
    throw DomainError("unknown series data '" + name + "'");
}

Mat series_V1(const SeriesData& d, double x, double zeta) {
    if (!(zeta >= 0 && zeta <= x && x <= d.r + 1e-12)) throw DomainError("series_V1: need 0 <= zeta <= x <= r");
    Mat v = d.U4((x + zeta) / 2) + d.U4((x - zeta) / 2);
    v -= integrate([&](double t) { return d.Fbreve(t, x - t + zeta); }, (x + zeta) / 2, x, 1, 12);
    v -= integrate([&](double t) { return d.Fbreve(t, x - t - zeta); }, (x - zeta) / 2, x - zeta, 1, 12);
    v -= integrate([&](double t) { return d.Fbreve(t, zeta + t - x); }, x - zeta, x, 1, 12);
    return 0.5 * v;
}

Mat series_Vk(const SeriesData& d, const Kernel2& prev, double x, double zeta, int q) {
    if (!(zeta >= 0 && zeta <= x && x <= d.r + 1e-12)) throw DomainError("series_Vk: need 0 <= zeta <= x <= r");
    const GaussRule& G = gauss_legendre(q);
    int b = d.b();
    Mat acc = Mat::Zero(b, b);
    // Each term: int_{t0}^{t1} int_{a(t)}^{t} (u4(s) - Fbreve(t,s)) prev(s, a(t)) ds dt.
    auto term = [&](double t0, double t1, auto a_of) {
        if (t1 <= t0) return;
        double ht = 0.5 * (t1 - t0);
        for (int i = 0; i < q; ++i) {
            double t = t0 + ht * (1 + G.x[i]);
            double a = a_of(t);
            double hs = 0.5 * (t - a);
            if (hs <= 0) continue;
            Mat inner = Mat::Zero(b, b);
            for (int k = 0; k < q; ++k) {
                double s = a + hs * (1 + G.x[k]);
                inner += G.w[k] * ((d.u4.value(s) - d.Fbreve(t, s)) * prev(s, a));
            }
            acc += (G.w[i] * ht * hs) * inner;
        }
    };
    term(x - zeta, x, [&](double t) { return zeta + t - x; });
    term((x + zeta) / 2, x, [&](double t) { return zeta + x - t; });
    term((x - zeta) / 2, x - zeta, [&](double t) { return x - t - zeta; });
    return 0.5 * acc;
}

namespace {
void lobatto(int N, std::vector<double>& nodes, std::vector<double>& w) {
    nodes.resize(N);
    w.resize(N);
    for (int j = 0; j < N; ++j) {
        nodes[j] = 0.5 * (1 - std::cos(M_PI * j / (N - 1)));
        w[j] = (j % 2 ? -1.0 : 1.0) * ((j == 0 || j == N - 1) ? 0.5 : 1.0);
    }
}

std::vector<double> bary(const std::vector<double>& nodes, const std::vector<double>& w, double x) {
    std::vector<double> l(nodes.size(), 0.0);
    for (size_t j = 0; j < nodes.size(); ++j)
        if (x == nodes[j]) {
            l[j] = 1;
            return l;
        }
    double s = 0;
    for (size_t j = 0; j < nodes.size(); ++j) {
        l[j] = w[j] / (x - nodes[j]);
        s += l[j];
    }
    for (double& v : l) v /= s;
    return l;
}
} // namespace

TriangleTable::TriangleTable(const Kernel2& f, double r, int b, int N) : r_(r), b_(b) {
    if (N < 2) throw DomainError("TriangleTable: need at least 2 nodes");
    lobatto(N, ss_, ws_);
    xs_ = ss_;
    wx_ = ws_;
    for (double& x : xs_) x *= r;
    v_.resize(N * N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) v_[i * N + j] = f(xs_[i], ss_[j] * xs_[i]);
}

Mat TriangleTable::operator()(double x, double zeta) const {
    double s = x > 0 ? std::clamp(zeta / x, 0.0, 1.0) : 0.0;
    auto lx = bary(ss_, wx_, x / r_);
    auto ls = bary(ss_, ws_, s);
    int N = ss_.size();
    Mat acc = Mat::Zero(b_, b_);
    for (int i = 0; i < N; ++i) {
        if (lx[i] == 0) continue;
        for (int j = 0; j < N; ++j)
            if (ls[j] != 0) acc += (lx[i] * ls[j]) * v_[i * N + j];
    }
    return acc;
}

double series_bound(double C, int k, double x) {
    return std::pow(3 * C * C, k - 1) / std::tgamma(k) * C * std::pow(x, k - 1);
}

Mat SeriesResult::sum(double x, double zeta) const {
    Mat acc = terms.front()(x, zeta);
    for (size_t k = 1; k < terms.size(); ++k) acc += terms[k](x, zeta);
    return acc;
}

KernelFn SeriesResult::kernel() const {
    KernelFn k;
    k.b = terms.empty() ? 1 : terms.front().at(0, 0).rows();
    k.domain = KernelDomain::triangle;
    auto self = *this;
    k.k = [self](double x, double t) { return self.sum(x, t); };
    return k;
}

SeriesResult series_sum(const SeriesData& d, int kmax, int table_n) {
    if (kmax < 1) throw DomainError("series_sum: kmax must be >= 1");
    SeriesResult res;
    res.terms.reserve(kmax);
    int b = d.b();
    res.terms.emplace_back([&](double x, double z) { return series_V1(d, x, z); }, d.r, b, table_n);
    for (int k = 2; k <= kmax; ++k) {
        const TriangleTable& prev = res.terms.back();
        Kernel2 pf = [&prev](double x, double z) { return prev(x, z); };
        res.terms.emplace_back([&](double x, double z) { return series_Vk(d, pf, x, z); }, d.r, b, table_n);
    }
    auto sup = [&](const TriangleTable& t) {
        double m = 0;
        for (int i = 0; i < table_n; ++i)
            for (int j = 0; j < table_n; ++j) m = std::max(m, op_norm(t.at(i, j)));
        return m;
    };
    res.C = std::max(d.data_constant(), sup(res.terms.front()));
    res.bound_holds = true;
    for (int k = 1; k <= kmax; ++k) {
        const TriangleTable& t = res.terms[k - 1];
        double mx = 0, ratio = 0;
        for (int i = 0; i < table_n; ++i)
            for (int j = 0; j < table_n; ++j) {
                double v = op_norm(t.at(i, j));
                mx = std::max(mx, v);
                double bd = series_bound(res.C, k, t.x_nodes()[i]);
                if (bd > 0)
                    ratio = std::max(ratio, v / bd);
                else if (v > 0)
                    ratio = INFINITY;
            }
        res.max_norm.push_back(mx);
        res.bound_ratio.push_back(ratio);
        double limit = k == 1 ? 1.0 + 1e-12 : 1.0;
        if (!(k == 1 ? ratio <= limit : ratio < limit)) res.bound_holds = false;
    }
    return res;
}

V0Result build_V0(const DiscreteOperator& V, const MatrixProfile& beta2) {
    const Grid& g = V.grid;
    int n = g.n, b = V.b;
    double h = g.h();
    Mat B2 = sample_mid(beta2, g);
    Mat b0 = beta2.value(0.0);
    if (Eigen::PartialPivLU<Mat>(b0).rcond() < 1e-12) throw SingularError("build_V0: beta2(0) is singular", 0.0);
    auto inv = operator_inverse(V);
    Mat gv = inv.inv.M * B2;
    V0Result res;
    res.kernel.resize(n);
    for (int j = 1; j < n; ++j) res.kernel[j] = (cell(gv, j, b) - cell(gv, j - 1, b)) / h;
    res.kernel[0] = n > 2 ? Mat(2 * res.kernel[1] - res.kernel[2]) : res.kernel[1];
    Mat M = Mat::Zero(n * b, n * b);
    for (int i = 0; i < n; ++i) {
        M.block(i * b, i * b, b, b) = b0 + 0.5 * h * res.kernel[0];
        for (int k = 0; k < i; ++k) M.block(i * b, k * b, b, b) = h * res.kernel[i - k];
    }
    res.V0 = {g, b, M, Structure::convolution};
    Mat At = volterra_Atilde(g, b);
    res.commutation_residual = op_norm(M * At - At * M);
    Mat ones(n * b, b);
    for (int i = 0; i < n; ++i) ones.block(i * b, 0, b, b) = Mat::Identity(b, b);
    Mat diff = M * ones - gv;
    for (int i = 0; i < n; ++i) res.a45_residual = std::max(res.a45_residual, cell(diff, i, b).norm());
    return res;
}

double a40_residual(const std::function<Mat(double)>& v, const std::function<double(double)>& a, double r,
                    int samples) {
    double worst = 0;
    for (int i = 1; i <= samples; ++i)
        for (int k = 0; k <= i; ++k) {
            double x = r * i / samples, s = r * k / samples;
            if (x <= s) continue;
            Mat l = integrate([&](double t) { return Mat(a(t - s) * v(x - t)); }, s, x, 2, 12);
            Mat rr = integrate([&](double t) { return Mat(a(x - t) * v(t - s)); }, s, x, 2, 12);
            worst = std::max(worst, (l - rr).norm());
        }
    return worst;
}

namespace {

// Global block system for the lower-triangular unknowns of E, solved by QR.
Mat global_E(const Mat& K, const Mat& B2, int n, int b, double h, int& nullity) {
    int nb2 = b * b;
    auto idx = [&](int i, int k, int p, int q) { return (i * (i + 1) / 2 + k) * nb2 + p * b + q; };
    int unknowns = n * (n + 1) / 2 * nb2;
    int eqs = (n * (n - 1) / 2 + n) * nb2;
    Mat G = Mat::Zero(eqs, unknowns);
    Vec rhs = Vec::Zero(eqs);
    int row = 0;
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < i; ++c)
            for (int p = 0; p < b; ++p)
                for (int q = 0; q < b; ++q, ++row) {
                    for (int l = c; l < i; ++l)
                        for (int s = 0; s < b; ++s) G(row, idx(l, c, s, q)) += K(i * b + p, l * b + s);
                    for (int k = c + 1; k <= i; ++k) G(row, idx(i, k, p, q)) -= -(k - c) * h * h;
                }
        for (int p = 0; p < b; ++p)
            for (int q = 0; q < b; ++q, ++row) {
                for (int k = 0; k <= i; ++k) G(row, idx(i, k, p, q)) = 1.0;
                rhs(row) = B2(i * b + p, q);
            }
    }
    Eigen::ColPivHouseholderQR<Mat> qr(G);
    qr.setThreshold(1e-12);
    nullity = unknowns - static_cast<int>(qr.rank());
    Vec sol = qr.solve(rhs);
    Mat E = Mat::Zero(n * b, n * b);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k <= i; ++k)
            for (int p = 0; p < b; ++p)
                for (int q = 0; q < b; ++q) E(i * b + p, k * b + q) = sol(idx(i, k, p, q));
    return E;
}

} // namespace

NormalizedE discrete_normalized_E(const CanonicalSystem& sys, const Grid& g, int global_check_max) {
    int n = g.n, b = sys.m2();
    double h = g.h();
    Mat K = assemble_K(sys, g).M;
    Mat B1 = sample_mid(sys.beta1(), g), B2 = sample_mid(sys.beta2(), g);
    Mat E = Mat::Zero(n * b, n * b);
    auto blk = [&](int i, int k) { return E.block(i * b, k * b, b, b); };
    for (int i = 0; i < n; ++i) {
        Mat R = K.block(i * b, 0, b, i * b) * E.topRows(i * b);
        for (int c = i - 1; c >= 0; --c) {
            Mat acc = R.block(0, c * b, b, b);
            for (int k = c + 2; k <= i; ++k) acc -= (-(k - c) * h * h) * blk(i, k);
            blk(i, c + 1) = acc / (-h * h);
        }
        Mat s = B2.block(i * b, 0, b, b);
        for (int k = 1; k <= i; ++k) s -= blk(i, k);
        blk(i, 0) = s;
    }
    NormalizedE res;
    res.grid = g;
    res.b = b;
    res.E = {g, b, E, Structure::lower};
    Mat At = volterra_Atilde(g, b);
    double kn = op_norm(K);
    res.similarity_residual = op_norm(K * E - E * At) / (kn > 0 ? kn : 1.0);
    for (int i = 0; i < n; ++i) {
        Mat s = Mat::Zero(b, b);
        for (int k = 0; k <= i; ++k) s += blk(i, k);
        res.normalization_residual = std::max(res.normalization_residual, (s - B2.block(i * b, 0, b, b)).norm());
    }
    Eigen::PartialPivLU<Mat> lu(E);
    if (!(lu.rcond() > 1e-14)) throw SingularError("discrete_normalized_E: E is singular", lu.rcond());
    res.Phi1 = lu.solve(B1);
    Mat b20 = sys.beta2().value(0.0);
    Mat at0 = Eigen::PartialPivLU<Mat>(b20).solve(sys.beta1().value(0.0));
    res.Phi1_nodes = mid_to_nodes(res.Phi1, b, at0);
    Mat b20inv = b20.inverse();
    for (int i = 0; i < n; ++i) {
        Mat d = blk(i, i);
        if (i >= 2) d -= 0.5 * (2 * blk(i, i - 1) - blk(i, i - 2));
        res.u.push_back(d * b20inv);
    }
    if (n >= 4) {
        // u at midpoints 2.5h and 3.5h, extrapolated linearly to 0.
        res.u0 = res.u[2] - 2.5 * (res.u[3] - res.u[2]);
    } else {
        res.u0 = res.u[0];
    }
    if (n <= global_check_max) {
        Mat Eq = global_E(K, B2, n, b, h, res.nullity);
        res.qr_difference = (Eq - E).norm();
    }
    return res;
}

MatrixProfile profile_from_nodes(const Grid& g, const std::vector<Mat>& v, std::string name) {
    int n = g.n;
    double h = g.h();
    std::vector<Mat> d(n + 1), dd(n + 1);
    auto deriv = [&](const std::vector<Mat>& f, std::vector<Mat>& out) {
        for (int i = 1; i < n; ++i) out[i] = (f[i + 1] - f[i - 1]) / (2 * h);
        if (n >= 2) {
            out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2 * h);
            out[n] = (3.0 * f[n] - 4.0 * f[n - 1] + f[n - 2]) / (2 * h);
        } else {
            out[0] = out[n] = (f[1] - f[0]) / h;
        }
    };
    deriv(v, d);
    deriv(d, dd);
    return MatrixProfile::sampled(g.nodes(), v, d, dd, std::move(name));
}

MatrixProfile NormalizedE::phi1_profile() const { return profile_from_nodes(grid, Phi1_nodes, "discrete_E_phi1"); }

double sample_defect(const Mat& samples, int bsz, const Grid& g) {
    int n = g.n;
    double h = g.h();
    int cols = samples.cols();
    std::vector<Mat> f(n);
    for (int i = 0; i < n; ++i) f[i] = samples.block(i * bsz, 0, bsz, cols);
    auto deriv = [&](const std::vector<Mat>& v) {
        std::vector<Mat> out(n);
        for (int i = 1; i + 1 < n; ++i) out[i] = (v[i + 1] - v[i - 1]) / (2 * h);
        out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2 * h);
        out[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2 * h);
        return out;
    };
    auto defect = [&](const std::vector<Mat>& v, const std::vector<Mat>& dv) {
        double worst = 0;
        Mat acc = Mat::Zero(bsz, cols);
        for (int i = 1; i < n; ++i) {
            acc += 0.5 * h * (dv[i - 1] + dv[i]);
            worst = std::max(worst, (v[i] - v[0] - acc).norm());
        }
        return worst;
    };
    if (n < 3) return 0;
    auto d1 = deriv(f);
    auto d2 = deriv(d1);
    return std::max(defect(f, d1), defect(d1, d2));
}

SmoothnessReport smoothness_diagnostics(const DiscreteOperator& op, const MatrixProfile& f) {
    SmoothnessReport rep;
    Mat s = sample_mid(f, op.grid);
    rep.input_defect = sample_defect(s, op.b, op.grid);
    rep.output_defect = sample_defect(op.M * s, op.b, op.grid);
    return rep;
}

} // namespace cansys
