#include "cansys/numgrid.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

namespace cansys {

Grid::Grid(double r_, int n_) : r(r_), n(n_) {
    if (!(r > 0) || !std::isfinite(r)) throw DomainError("grid: r must be positive");
    if (n < 2) throw DomainError("grid: n must be at least 2");
}

std::vector<double> Grid::nodes() const {
    std::vector<double> x(n + 1);
    for (int i = 0; i <= n; ++i) x[i] = node(i);
    x[n] = r;
    return x;
}

std::vector<double> Grid::mids() const {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = mid(i);
    return x;
}

std::vector<double> Grid::trapezoid_weights() const {
    std::vector<double> w(n + 1, h());
    w[0] = w[n] = 0.5 * h();
    return w;
}

Grid Grid::prefix(int k) const {
    if (k < 2 || k > n) throw DomainError("grid prefix: need 2 <= k <= n");
    if (k == n) return *this;
    return Grid(k * h(), k);
}

static GaussRule make_rule(int q) {
    GaussRule g;
    g.x.resize(q);
    g.w.resize(q);
    for (int i = 0; i < q; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (q + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = x;
            for (int k = 2; k <= q; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (q == 1) p1 = x, p0 = 1;
            dp = q * (x * p1 - p0) / (x * x - 1);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1, p1 = x;
        for (int k = 2; k <= q; ++k) {
            double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = q * (x * p1 - p0) / (x * x - 1);
        g.x[i] = x;
        g.w[i] = 2 / ((1 - x * x) * dp * dp);
    }
    return g;
}

const GaussRule& gauss_legendre(int q) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<GaussRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[q];
    if (!slot) slot = std::make_unique<GaussRule>(make_rule(q));
    return *slot;
}

Mat integrate(const std::function<Mat(double)>& f, double a, double b, int panels, int q) {
    const GaussRule& g = gauss_legendre(q);
    Mat acc;
    if (b == a) {
        acc = f(a);
        acc.setZero();
        return acc;
    }
    double len = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double c = a + (p + 0.5) * len, hw = 0.5 * len;
        for (int i = 0; i < q; ++i) {
            Mat v = f(c + hw * g.x[i]) * (hw * g.w[i]);
            if (acc.size() == 0)
                acc = v;
            else
                acc += v;
        }
    }
    return acc;
}

cplx integrate_scalar(const std::function<cplx(double)>& f, double a, double b, int panels, int q) {
    const GaussRule& g = gauss_legendre(q);
    cplx acc = 0;
    double len = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double c = a + (p + 0.5) * len, hw = 0.5 * len;
        for (int i = 0; i < q; ++i) acc += f(c + hw * g.x[i]) * (hw * g.w[i]);
    }
    return acc;
}

// ---------------------------------------------------------------- profiles

MatrixProfile::MatrixProfile(int rows, int cols, Fn value, Fn d1, Fn d2, std::string provenance)
    : rows_(rows), cols_(cols), v_(std::move(value)), d1_(std::move(d1)), d2_(std::move(d2)),
      prov_(std::move(provenance)) {}

MatrixProfile MatrixProfile::constant(const Mat& c, std::string provenance) {
    Mat z = Mat::Zero(c.rows(), c.cols());
    return MatrixProfile(
        c.rows(), c.cols(), [c](double) { return c; }, [z](double) { return z; },
        [z](double) { return z; }, std::move(provenance));
}

Mat MatrixProfile::d1(double x) const {
    if (!d1_) throw DomainError("profile '" + prov_ + "' has no first derivative");
    return d1_(x);
}

Mat MatrixProfile::d2(double x) const {
    if (!d2_) throw DomainError("profile '" + prov_ + "' has no second derivative");
    return d2_(x);
}

MatrixProfile MatrixProfile::block(int r0, int c0, int nr, int nc) const {
    auto wrap = [=](const Fn& f) -> Fn {
        if (!f) return {};
        return [=](double x) -> Mat { return f(x).block(r0, c0, nr, nc); };
    };
    return MatrixProfile(nr, nc, wrap(v_), wrap(d1_), wrap(d2_), prov_);
}

MatrixProfile MatrixProfile::adjoint() const {
    auto wrap = [](const Fn& f) -> Fn {
        if (!f) return {};
        return [=](double x) -> Mat { return f(x).adjoint(); };
    };
    return MatrixProfile(cols_, rows_, wrap(v_), wrap(d1_), wrap(d2_), prov_);
}

MatrixProfile MatrixProfile::operator*(const Mat& right) const {
    auto wrap = [right](const Fn& f) -> Fn {
        if (!f) return {};
        return [=](double x) -> Mat { return f(x) * right; };
    };
    return MatrixProfile(rows_, static_cast<int>(right.cols()), wrap(v_), wrap(d1_), wrap(d2_), prov_);
}

namespace {

struct Hermite {
    std::vector<double> x;
    std::vector<Mat> v, d, dd;

    int locate(double t) const {
        int n = static_cast<int>(x.size()) - 1;
        if (t <= x[0]) return 0;
        if (t >= x[n]) return n - 1;
        auto it = std::upper_bound(x.begin(), x.end(), t);
        return std::max(0, static_cast<int>(it - x.begin()) - 1);
    }
    Mat value(double t) const {
        int k = locate(t);
        double h = x[k + 1] - x[k], s = (t - x[k]) / h;
        double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
        double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
        return h00 * v[k] + h10 * h * d[k] + h01 * v[k + 1] + h11 * h * d[k + 1];
    }
    Mat deriv(double t) const {
        int k = locate(t);
        double h = x[k + 1] - x[k], s = (t - x[k]) / h;
        double a00 = 6 * s * s - 6 * s, a10 = 3 * s * s - 4 * s + 1;
        double a01 = -6 * s * s + 6 * s, a11 = 3 * s * s - 2 * s;
        return (a00 * v[k] + a01 * v[k + 1]) / h + a10 * d[k] + a11 * d[k + 1];
    }
    Mat second(double t) const {
        int k = locate(t);
        double h = x[k + 1] - x[k], s = (t - x[k]) / h;
        if (!dd.empty()) return (1 - s) * dd[k] + s * dd[k + 1];
        double b00 = 12 * s - 6, b10 = 6 * s - 4, b01 = -12 * s + 6, b11 = 6 * s - 2;
        return (b00 * v[k] + b01 * v[k + 1]) / (h * h) + (b10 * d[k] + b11 * d[k + 1]) / h;
    }
};

} // namespace

MatrixProfile MatrixProfile::sampled(std::vector<double> x, std::vector<Mat> v, std::vector<Mat> d1,
                                     std::vector<Mat> d2, std::string provenance) {
    if (x.size() < 2 || v.size() != x.size() || d1.size() != x.size())
        throw FormatError("sampled profile: need matching value and d1 samples (>= 2)");
    if (!d2.empty() && d2.size() != x.size()) throw FormatError("sampled profile: d2 block size mismatch");
    for (size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1])) throw FormatError("sampled profile: x not strictly increasing");
    int r = v[0].rows(), c = v[0].cols();
    for (size_t i = 0; i < x.size(); ++i) {
        if (v[i].rows() != r || v[i].cols() != c || d1[i].rows() != r || d1[i].cols() != c)
            throw FormatError("sampled profile: inconsistent dimensions");
    }
    bool has2 = !d2.empty();
    auto hp = std::make_shared<Hermite>(Hermite{std::move(x), std::move(v), std::move(d1), std::move(d2)});
    Fn fv = [hp](double t) { return hp->value(t); };
    Fn f1 = [hp](double t) { return hp->deriv(t); };
    Fn f2;
    if (has2) f2 = [hp](double t) { return hp->second(t); };
    return MatrixProfile(r, c, fv, f1, f2, std::move(provenance));
}

namespace {

// Max over even nodes of |F(x_i) - F(0) - int_0^x_i g| with the cellwise
// trapezoid on nodal data.  With dg the endpoint correction h^2/12 (g'_a - g'_b)
// is added; without it the trapezoid is Richardson-extrapolated against step 2h.
template <class V, class G, class DG>
double nodal_defect(const Grid& g, V value, G deriv, DG dderiv, bool corrected) {
    double h = g.h(), worst = 0;
    Mat f0 = value(0.0);
    Mat fine = Mat::Zero(f0.rows(), f0.cols()), coarse = fine;
    Mat ga = deriv(0.0);
    Mat da = corrected ? dderiv(0.0) : Mat();
    for (int i = 1; i <= g.n; ++i) {
        double xb = g.node(i);
        Mat gb = deriv(xb);
        fine += 0.5 * h * (ga + gb);
        if (corrected) {
            Mat db = dderiv(xb);
            fine += h * h / 12 * (da - db);
            da = db;
        }
        ga = gb;
        if (i % 2) continue;
        Mat est = fine;
        if (!corrected) {
            coarse += h * (deriv(xb - 2 * h) + gb);
            est = (4.0 * fine - coarse) / 3.0;
        }
        worst = std::max(worst, (value(xb) - f0 - est).norm());
    }
    return worst;
}

} // namespace

ConsistencyReport check_consistency(const MatrixProfile& f, const Grid& g) {
    ConsistencyReport rep;
    if (!f.has_d1()) throw DomainError("consistency check needs first-derivative data");
    rep.has_d2 = f.has_d2();
    auto v = [&](double x) { return f.value(x); };
    auto d1 = [&](double x) { return f.d1(x); };
    auto d2 = [&](double x) { return f.d2(x); };
    rep.value_defect = nodal_defect(g, v, d1, d2, rep.has_d2);
    if (rep.has_d2) rep.d1_defect = nodal_defect(g, d1, d2, d2, false);
    return rep;
}

// --------------------------------------------------------------- signature

Mat SignatureSpec::j() const {
    Mat s = Mat::Identity(m(), m());
    s.bottomRightCorner(m2, m2) *= -1.0;
    return s;
}

Mat SignatureSpec::J() const {
    if (m1 != m2) throw DomainError("J requires m1 == m2");
    int p = m1;
    Mat s = Mat::Zero(2 * p, 2 * p);
    s.topRightCorner(p, p).setIdentity();
    s.bottomLeftCorner(p, p).setIdentity();
    return s;
}

Mat SignatureSpec::Theta() const {
    if (m1 != m2) throw DomainError("Theta requires m1 == m2");
    int p = m1;
    Mat t = Mat::Identity(2 * p, 2 * p);
    t.topRightCorner(p, p) = -Mat::Identity(p, p);
    t.bottomLeftCorner(p, p) = Mat::Identity(p, p);
    return t / std::sqrt(2.0);
}

// --------------------------------------------------------------- operators

DiscreteOperator identity_operator(const Grid& g, int b) {
    return {g, b, Mat::Identity(g.n * b, g.n * b), Structure::multiplication};
}

DiscreteOperator multiplication_operator(const MatrixProfile& m, const Grid& g) {
    if (m.rows() != m.cols()) throw FormatError("multiplication operator needs a square profile");
    int b = m.rows();
    Mat M = Mat::Zero(g.n * b, g.n * b);
    for (int i = 0; i < g.n; ++i) M.block(i * b, i * b, b, b) = m.value(g.mid(i));
    return {g, b, M, Structure::multiplication};
}

DiscreteOperator assemble_integral_operator(const KernelFn& kernel, const Grid& g) {
    int b = kernel.b, n = g.n;
    double h = g.h();
    Mat M = Mat::Zero(n * b, n * b);
    bool tri = kernel.domain == KernelDomain::triangle;
    for (int i = 0; i < n; ++i) {
        double x = g.mid(i);
        for (int k = 0; k < n; ++k) {
            if (tri && k > i) continue;
            Mat v;
            double w = h;
            if (k == i) {
                v = kernel.on_diag(x);
                if (tri) w = 0.5 * h;
            } else {
                v = kernel.k(x, g.mid(k));
            }
            if (!v.allFinite()) {
                std::ostringstream os;
                os << "assembly: non-finite kernel value at (x,t) = (" << x << ", " << g.mid(k) << ")";
                throw NumericalError(os.str());
            }
            M.block(i * b, k * b, b, b) = v * w;
        }
    }
    return {g, b, M, tri ? Structure::lower : Structure::general};
}

DiscreteOperator operator_compose(const DiscreteOperator& a, const DiscreteOperator& b) {
    if (a.dim() != b.dim()) throw FormatError("compose: incompatible shapes");
    Structure t = Structure::general;
    if (a.tag == Structure::multiplication) t = b.tag;
    else if (b.tag == Structure::multiplication) t = a.tag;
    else if (a.tag == Structure::lower && b.tag == Structure::lower) t = Structure::lower;
    return {a.grid, a.b, a.M * b.M, t};
}

DiscreteOperator operator_adjoint(const DiscreteOperator& a) {
    // Uniform cell weights, so the weighted adjoint is the conjugate transpose.
    Structure t = a.tag == Structure::multiplication ? Structure::multiplication : Structure::general;
    return {a.grid, a.b, a.M.adjoint(), t};
}

DiscreteOperator operator_sum(const DiscreteOperator& a, const DiscreteOperator& b, cplx sb) {
    if (a.dim() != b.dim()) throw FormatError("sum: incompatible shapes");
    Structure t = a.tag == b.tag ? a.tag : Structure::general;
    return {a.grid, a.b, a.M + sb * b.M, t};
}

InverseResult operator_inverse(const DiscreteOperator& a, double min_rcond) {
    Eigen::PartialPivLU<Mat> lu(a.M);
    double rc = lu.rcond();
    if (!(rc > min_rcond)) {
        std::ostringstream os;
        os << "inverse: operator is ill-conditioned (rcond estimate " << rc << ")";
        throw SingularError(os.str(), rc);
    }
    Structure t = a.tag == Structure::lower ? Structure::lower : a.tag;
    return {{a.grid, a.b, lu.inverse(), t}, rc};
}

Mat flip(const Mat& f, int b) {
    int n = static_cast<int>(f.rows()) / b;
    Mat out(f.rows(), f.cols());
    for (int i = 0; i < n; ++i) out.middleRows(i * b, b) = f.middleRows((n - 1 - i) * b, b).conjugate();
    return out;
}

DiscreteOperator flip_conjugate(const DiscreteOperator& a) {
    int n = a.grid.n, b = a.b;
    Mat out(a.M.rows(), a.M.cols());
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            out.block(i * b, k * b, b, b) = a.M.block((n - 1 - i) * b, (n - 1 - k) * b, b, b).conjugate();
    Structure t = a.tag == Structure::lower ? Structure::general : a.tag;
    return {a.grid, b, out, t};
}

Mat inner(const Mat& f, const Mat& g, const Grid& grid) { return grid.h() * (g.adjoint() * f); }

double op_norm(const Mat& m) {
    if (m.size() == 0) return 0;
    if (std::min(m.rows(), m.cols()) <= 16) return Eigen::JacobiSVD<Mat>(m).singularValues()(0);
    return Eigen::BDCSVD<Mat>(m).singularValues()(0);
}

Mat sample_mid(const MatrixProfile& f, const Grid& g) {
    Mat s(g.n * f.rows(), f.cols());
    for (int i = 0; i < g.n; ++i) s.middleRows(i * f.rows(), f.rows()) = f.value(g.mid(i));
    return s;
}

std::vector<Mat> sample_nodes(const MatrixProfile& f, const Grid& g) {
    std::vector<Mat> out;
    out.reserve(g.n + 1);
    for (double x : g.nodes()) out.push_back(f.value(x));
    return out;
}

Mat cell(const Mat& samples, int i, int b) { return samples.middleRows(i * b, b); }

std::vector<Mat> mid_to_nodes(const Mat& samples, int b, const Mat& at_zero) {
    int n = static_cast<int>(samples.rows()) / b;
    std::vector<Mat> out(n + 1);
    out[0] = at_zero;
    for (int i = 1; i < n; ++i) out[i] = 0.5 * (cell(samples, i - 1, b) + cell(samples, i, b));
    out[n] = 1.5 * cell(samples, n - 1, b) - 0.5 * cell(samples, n - 2, b);
    return out;
}

} // namespace cansys
