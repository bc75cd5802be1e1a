#include "cansys/system.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace cansys {

Mat CanonicalSystem::H(double x) const {
    Mat b = beta.value(x);
    return b.adjoint() * b;
}

ValidationReport validate_beta(const CanonicalSystem& sys, const Grid& g, double tol) {
    if (!sys.beta.has_d1()) throw DomainError("validate_beta: profile '" + sys.beta.provenance() + "' has no derivative data");
    if (sys.beta.rows() != sys.m2() || sys.beta.cols() != sys.m())
        throw FormatError("validate_beta: beta must be m2 x m");
    ValidationReport rep;
    rep.tol = tol;
    Mat s = sys.signature();
    Mat iI = I1 * Mat::Identity(sys.m2(), sys.m2());
    rep.min_eig_H = 1.0;
    for (double x : g.nodes()) {
        Mat b = sys.beta.value(x), d = sys.beta.d1(x);
        rep.flat_residual = std::max(rep.flat_residual, (b * s * b.adjoint()).norm());
        rep.deriv_residual = std::max(rep.deriv_residual, (d * s * b.adjoint() - iI).norm());
        Mat h = b.adjoint() * b;
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.adjoint()));
        double sc = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
        rep.min_eig_H = std::min(rep.min_eig_H, es.eigenvalues().minCoeff() / sc);
    }
    rep.consistency = check_consistency(sys.beta, g);
    rep.pass = rep.flat_residual < tol && rep.deriv_residual < tol && rep.min_eig_H >= -1e-12;
    return rep;
}

namespace {

// The step exponentials and their products are accumulated in long double so that
// for real lam the j-relation holds to rounding at the scale of |W|, not |W|^2 n eps.
std::vector<Mat> march(const std::function<Mat(double)>& H, const Mat& sig, cplx lam, const Grid& g) {
    using LMat = Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic>;
    int m = sig.rows();
    std::vector<Mat> W(g.n + 1);
    W[0] = Mat::Identity(m, m);
    LMat acc = LMat::Identity(m, m);
    LMat lsig = sig.cast<std::complex<long double>>();
    std::complex<long double> c(-lam.imag() * (long double)g.h(), lam.real() * (long double)g.h());
    for (int k = 0; k < g.n; ++k) {
        Mat Hk = H(g.mid(k));
        Hk = 0.5 * (Hk + Hk.adjoint()).eval();
        LMat gen = c * (lsig * Hk.cast<std::complex<long double>>());
        double nrm = static_cast<double>(gen.cwiseAbs().rowwise().sum().maxCoeff());
        if (nrm > 50.0) {
            std::ostringstream os;
            os << "integrate_fundamental: step generator norm " << nrm << " at x = " << g.mid(k)
               << "; refine the grid or rescale lambda";
            throw NumericalError(os.str());
        }
        LMat e = gen.exp();
        acc = (e * acc).eval();
        W[k + 1] = acc.cast<cplx>();
        if (!W[k + 1].allFinite() || W[k + 1].norm() > 1e250)
            throw NumericalError("integrate_fundamental: overflow; reduce |lambda| r");
    }
    return W;
}

void finish(FundamentalSolution& fs, const Mat& Wbar_end) {
    const Mat& s = fs.sig;
    fs.Winv = s * Wbar_end.adjoint() * s;
    fs.j_residual = (Wbar_end.adjoint() * s * fs.end() - s).norm();
    int m = s.rows();
    fs.inverse_residual = (fs.Winv * fs.end() - Mat::Identity(m, m)).norm();
}

} // namespace

FundamentalSolution integrate_fundamental(const std::function<Mat(double)>& H, const Mat& sig, cplx lam,
                                          const Grid& g) {
    FundamentalSolution fs;
    fs.lam = lam;
    fs.sig = sig;
    fs.x = g.nodes();
    fs.method = "exponential-midpoint";
    if (lam == cplx(0)) {
        fs.W.assign(g.n + 1, Mat::Identity(sig.rows(), sig.rows()));
        finish(fs, fs.W.back());
        return fs;
    }
    fs.W = march(H, sig, lam, g);
    Mat wbar = lam.imag() == 0 ? fs.end() : march(H, sig, std::conj(lam), g).back();
    finish(fs, wbar);
    return fs;
}

FundamentalSolution integrate_fundamental(const CanonicalSystem& sys, cplx lam, const Grid& g) {
    return integrate_fundamental([&](double x) { return sys.H(x); }, sys.signature(), lam, g);
}

double flux_residual(const CanonicalSystem& sys, cplx lam, const Grid& g) {
    Mat s = sys.signature();
    auto fs = integrate_fundamental(sys, lam, g);
    double h = g.h(), worst = 0;
    cplx coef = I1 * (lam - std::conj(lam));
    for (int k = 0; k < g.n; ++k) {
        Mat a0 = fs.W[k].adjoint() * s * fs.W[k];
        Mat a1 = fs.W[k + 1].adjoint() * s * fs.W[k + 1];
        Mat Hm = sys.H(g.mid(k));
        Mat Wm = ((I1 * lam * 0.5 * h) * (s * Hm)).exp() * fs.W[k];
        Mat rhs = coef * (Wm.adjoint() * Hm * Wm);
        worst = std::max(worst, ((a1 - a0) / h - rhs).norm());
    }
    return worst;
}

cplx upper_sqrt(cplx w) {
    cplx s = std::sqrt(w);
    if (s.imag() < 0) s = -s;
    return s;
}

QuadraticRoots quadratic_roots(cplx lam) {
    if (lam == cplx(0)) throw DomainError("quadratic_roots: lambda must be nonzero");
    QuadraticRoots q;
    cplx d = lam + 0.25;
    q.sqrt_disc = upper_sqrt(d);
    q.double_root = std::abs(d) < 1e-14;
    q.real_axis_branch = !q.double_root && d.imag() == 0 && d.real() < 0;
    cplx base = -1.0 - 1.0 / (2.0 * lam);
    q.zeta1 = base + q.sqrt_disc / lam;
    q.zeta2 = base - q.sqrt_disc / lam;
    return q;
}

FundamentalSolution closed_form_example23(const std::vector<double>& xs, cplx lam, const Mat& alpha, double c) {
    int p = alpha.rows();
    if (alpha.cols() != p) throw FormatError("example23 closed form needs a square alpha");
    if ((alpha * alpha.adjoint() - Mat::Identity(p, p)).norm() > 1e-12)
        throw DomainError("example23 closed form needs alpha alpha^* = I");
    if (std::abs(c - 0.5) > 1e-15) throw DomainError("example23 closed form requires c = 1/2");
    SignatureSpec sig{p, p};
    Mat jm = sig.j();
    FundamentalSolution fs;
    fs.lam = lam;
    fs.sig = jm;
    fs.x = xs;
    fs.method = "closed-form";
    Mat I2 = Mat::Identity(2 * p, 2 * p);
    if (lam == cplx(0)) {
        fs.W.assign(xs.size(), I2);
        finish(fs, I2);
        return fs;
    }
    auto roots = quadratic_roots(lam);
    if (roots.double_root) throw DomainError("example23 closed form: lambda = -1/4 is a double root (degenerate branch)");
    Mat Id = Mat::Identity(p, p);
    Mat L(2 * p, 2 * p);
    L << alpha.adjoint(), alpha.adjoint(), roots.zeta1 * Id, roots.zeta2 * Id;
    Eigen::PartialPivLU<Mat> lu(L);
    Mat Linv = lu.inverse();
    // The eigenvalues of lam j K + c j are mu = lam (1 + zeta) + c = +-sqrt(lam + 1/4).
    cplx mu1 = lam * (1.0 + roots.zeta1) + c, mu2 = lam * (1.0 + roots.zeta2) + c;
    auto W_at = [&](double x, cplx m1, cplx m2) {
        Mat D = Mat::Zero(2 * p, 2 * p);
        D.topLeftCorner(p, p) = std::exp(I1 * m1 * x) * Id;
        D.bottomRightCorner(p, p) = std::exp(I1 * m2 * x) * Id;
        Mat ec = Mat::Zero(2 * p, 2 * p);
        ec.topLeftCorner(p, p) = std::exp(-I1 * c * x) * Id;
        ec.bottomRightCorner(p, p) = std::exp(I1 * c * x) * Id;
        return Mat(ec * L * D * Linv);
    };
    for (double x : xs) fs.W.push_back(W_at(x, mu1, mu2));
    // W(x, conj lam) from the same formula at conj lam.
    auto rb = quadratic_roots(std::conj(lam));
    Mat Lb(2 * p, 2 * p);
    Lb << alpha.adjoint(), alpha.adjoint(), rb.zeta1 * Id, rb.zeta2 * Id;
    Mat Lbinv = Lb.partialPivLu().inverse();
    cplx b1 = std::conj(lam) * (1.0 + rb.zeta1) + c, b2 = std::conj(lam) * (1.0 + rb.zeta2) + c;
    double xr = xs.empty() ? 0.0 : xs.back();
    Mat D = Mat::Zero(2 * p, 2 * p);
    D.topLeftCorner(p, p) = std::exp(I1 * b1 * xr) * Id;
    D.bottomRightCorner(p, p) = std::exp(I1 * b2 * xr) * Id;
    Mat ec = Mat::Zero(2 * p, 2 * p);
    ec.topLeftCorner(p, p) = std::exp(-I1 * c * xr) * Id;
    ec.bottomRightCorner(p, p) = std::exp(I1 * c * xr) * Id;
    finish(fs, ec * Lb * D * Lbinv);
    return fs;
}

namespace {

Mat example64_W(double r, cplx lam, int p) {
    cplx z = std::sqrt(lam);
    cplx zr = z * r;
    cplx co = std::cos(zr);
    // sin(zr)/z and z sin(zr) without cancellation near z = 0.
    cplx sdz = std::abs(zr) < 1e-4 ? r * (1.0 - zr * zr / 6.0) : std::sin(zr) / z;
    cplx zs = lam * sdz;
    Mat Id = Mat::Identity(p, p);
    Mat W(2 * p, 2 * p);
    W << co * Id, (I1 * zs) * Id, (-I1 * (r * co - sdz)) * Id, (co + r * zs) * Id;
    return W;
}

} // namespace

FundamentalSolution closed_form_example64(const std::vector<double>& xs, cplx lam, int p) {
    if (lam.imag() == 0 && lam.real() < 0) throw DomainError("example64 closed form: lambda on the negative axis");
    SignatureSpec sig{p, p};
    FundamentalSolution fs;
    fs.lam = lam;
    fs.sig = sig.J();
    fs.x = xs;
    fs.method = "closed-form";
    for (double x : xs) fs.W.push_back(example64_W(x, lam, p));
    double xr = xs.empty() ? 0.0 : xs.back();
    finish(fs, example64_W(xr, std::conj(lam), p));
    return fs;
}

namespace {

double par(const std::map<std::string, double>& m, const std::string& k, double def) {
    auto it = m.find(k);
    return it == m.end() ? def : it->second;
}

// rho e^{i theta} with its first two derivatives.
struct Phase {
    double rho, rho1, rho2, th, th1, th2;
    cplx v() const { return rho * std::exp(I1 * th); }
    cplx d1() const { return (rho1 + I1 * th1 * rho) * std::exp(I1 * th); }
    cplx d2() const { return (rho2 + 2.0 * I1 * th1 * rho1 + I1 * th2 * rho - th1 * th1 * rho) * std::exp(I1 * th); }
};

} // namespace

CanonicalSystem builtin_system(const std::string& name, double r, const std::map<std::string, double>& pm) {
    CanonicalSystem sys;
    sys.r = r;
    sys.name = name;
    if (name == "example23") {
        int p = static_cast<int>(par(pm, "p", 1));
        double ph = par(pm, "alpha_phase", 0.0), c = par(pm, "c", 0.5);
        sys.sig = {p, p};
        Mat alpha = std::exp(I1 * ph) * Mat::Identity(p, p);
        Mat Id = Mat::Identity(p, p);
        auto val = [=](double x, int k) {
            cplx f = std::pow(I1 * c, k), g = std::pow(-I1 * c, k);
            Mat b(p, 2 * p);
            b << (f * std::exp(I1 * c * x)) * alpha, (g * std::exp(-I1 * c * x)) * Id;
            return b;
        };
        sys.beta = MatrixProfile(p, 2 * p, [=](double x) { return val(x, 0); }, [=](double x) { return val(x, 1); },
                                 [=](double x) { return val(x, 2); }, "builtin:example23");
        return sys;
    }
    if (name == "example64" || name == "example65") {
        int p = static_cast<int>(par(pm, "p", 1));
        sys.sig = {p, p};
        Mat Id = Mat::Identity(p, p);
        Mat T = name == "example65" ? sys.sig.Theta() : Mat::Identity(2 * p, 2 * p);
        auto mk = [=](cplx a, cplx b) {
            Mat m(p, 2 * p);
            m << a * Id, b * Id;
            return Mat(m * T);
        };
        sys.hat = name == "example64";
        sys.beta = MatrixProfile(p, 2 * p, [=](double x) { return mk(I1 * x, 1.0); }, [=](double) { return mk(I1, 0.0); },
                                 [=](double) { return mk(0.0, 0.0); }, "builtin:" + name);
        return sys;
    }
    if (name == "admissible") {
        double a = par(pm, "a", 0.3), b = par(pm, "b", 2.0), w = par(pm, "theta_rate", -0.5);
        double eps = par(pm, "tail_eps", 0.0), ell = par(pm, "tail_ell", r);
        sys.sig = {1, 1};
        auto phases = [=](double x) {
            double t = std::max(0.0, x - ell);
            double q = 1 + a * std::sin(b * x) + eps * t * t * t * t;
            double q1 = a * b * std::cos(b * x) + 4 * eps * t * t * t;
            double q2 = -a * b * b * std::sin(b * x) + 12 * eps * t * t;
            double Q = x + a * (1 - std::cos(b * x)) / b + eps * std::pow(t, 5) / 5;
            double rho = 1 / std::sqrt(q);
            double rho1 = -0.5 * std::pow(q, -1.5) * q1;
            double rho2 = 0.75 * std::pow(q, -2.5) * q1 * q1 - 0.5 * std::pow(q, -1.5) * q2;
            Phase p1{rho, rho1, rho2, w * x + Q, w + q, q1};
            Phase p2{rho, rho1, rho2, w * x, w, 0.0};
            return std::pair<Phase, Phase>(p1, p2);
        };
        auto row = [](cplx u, cplx v) {
            Mat m(1, 2);
            m << u, v;
            return m;
        };
        sys.beta = MatrixProfile(
            1, 2,
            [=](double x) {
                auto [p1, p2] = phases(x);
                return row(p1.v(), p2.v());
            },
            [=](double x) {
                auto [p1, p2] = phases(x);
                return row(p1.d1(), p2.d1());
            },
            [=](double x) {
                auto [p1, p2] = phases(x);
                return row(p1.d2(), p2.d2());
            },
            "builtin:admissible");
        if (1 - std::abs(a) <= 0) throw DomainError("admissible: need |a| < 1");
        return sys;
    }
    if (name == "constant") {
        sys.sig = {1, 1};
        Mat c(1, 2);
        c << 1.0, 1.0;
        sys.beta = MatrixProfile::constant(c, "builtin:constant");
        return sys;
    }
    throw DomainError("unknown builtin profile '" + name + "'");
}

std::vector<std::string> builtin_names() { return {"example23", "example64", "example65", "admissible", "constant"}; }

} // namespace cansys
