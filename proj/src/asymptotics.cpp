#include "cansys/asymptotics.hpp"

#include <cmath>
#include <sstream>

#include "cansys/structured.hpp"
#include "cansys/system.hpp"
#include "cansys/transform.hpp"

namespace cansys {

cplx branch_sqrt(cplx lam) {
    if (lam.imag() < 0 || (lam.imag() == 0 && lam.real() <= 0))
        throw DomainError("branch_sqrt: lam must lie in the closed upper half-plane off (-inf, 0]");
    return std::sqrt(lam);
}

std::vector<cplx> ray_points(double theta, double zmin, double zmax, int count) {
    if (count < 1 || !(zmin > 0) || zmax < zmin) throw DomainError("ray_points: bad range");
    std::vector<cplx> z;
    for (int k = 0; k < count; ++k) {
        double t = count == 1 ? 0.0 : double(k) / (count - 1);
        z.push_back(std::polar(zmin * std::pow(zmax / zmin, t), theta));
    }
    return z;
}

RaySamples sample_ray(const std::function<Mat(cplx)>& phi, double r, bool hat, const std::vector<cplx>& z,
                      double theta) {
    RaySamples s;
    s.theta = theta;
    s.r = r;
    s.hat = hat;
    s.z = z;
    for (cplx zk : z) s.phi.push_back(phi(zk * zk));
    return s;
}

namespace {
void psi(cplx q, cplx& p0, cplx& p1) {
    if (std::abs(q) < 0.5) {
        // Taylor: p0 = sum q^k/(k+1)!, p1 = sum q^k/(k! (k+2)).
        p0 = 0;
        p1 = 0;
        cplx qk = 1;
        double fact = 1;
        for (int k = 0; k < 20; ++k) {
            if (k > 0) fact *= k;
            p0 += qk / (fact * (k + 1));
            p1 += qk / (fact * (k + 2));
            qk *= q;
        }
        return;
    }
    cplx e = std::exp(q);
    p0 = (e - 1.0) / q;
    p1 = (e * (q - 1.0) + 1.0) / (q * q);
}
} // namespace

std::vector<cplx> filon_weights(cplx z, double h, int N) {
    std::vector<cplx> w(N + 1, 0.0);
    cplx p0, p1;
    psi(I1 * z * h, p0, p1);
    for (int j = 0; j < N; ++j) {
        cplx E = std::exp(I1 * z * (j * h));
        w[j] += h * E * (p0 - p1);
        w[j + 1] += h * E * p1;
    }
    return w;
}

cplx filon_integral(cplx z, double h, const std::vector<cplx>& f) {
    auto w = filon_weights(z, h, static_cast<int>(f.size()) - 1);
    cplx s = 0;
    for (size_t j = 0; j < f.size(); ++j) s += w[j] * f[j];
    return s;
}

Mat main_term(const std::vector<Mat>& phi_nodes, double h, cplx z, bool hat) {
    int N = static_cast<int>(phi_nodes.size()) - 1;
    auto w = filon_weights(z, h, N);
    Mat acc = Mat::Zero(phi_nodes[0].rows(), phi_nodes[0].cols());
    for (int j = 0; j <= N; ++j) acc += w[j] * phi_nodes[j];
    return hat ? Mat(-z * acc) : Mat(I1 * z * acc);
}

Mat main_term(const MatrixProfile& Phi1, double r, int n, cplx z, bool hat) {
    Grid g(r, n);
    return main_term(sample_nodes(Phi1, g), g.h(), z, hat);
}

AsymptoticsReport verify_asymptotics(const RaySamples& s, const std::vector<Mat>& phi_nodes, double h,
                                     double kappa_b) {
    if (s.z.size() < 4) throw DomainError("verify_asymptotics: need at least 4 samples for a decay verdict");
    int N = static_cast<int>(phi_nodes.size()) - 1;
    std::vector<Mat> coarse;
    if (N % 2 == 0 && N >= 4)
        for (int j = 0; j <= N; j += 2) coarse.push_back(phi_nodes[j]);
    AsymptoticsReport rep;
    for (size_t k = 0; k < s.z.size(); ++k) {
        cplx z = s.z[k];
        Mat m = main_term(phi_nodes, h, z, s.hat);
        double rho = (s.phi[k] - m).norm();
        double fl = 1e-15 * (s.phi[k].norm() + m.norm());
        if (!coarse.empty()) fl += (m - main_term(coarse, 2 * h, z, s.hat)).norm() / 3.0;
        rep.z.push_back(z);
        rep.rho.push_back(rho);
        rep.floor.push_back(fl);
        rep.envelope.push_back(rho * std::exp(z.imag() * s.r) / std::abs(z));
        bool ok = rho > 100 * fl;
        rep.resolved.push_back(ok);
        if (ok) ++rep.n_resolved;
    }
    std::vector<size_t> idx;
    for (size_t k = 0; k < rep.z.size(); ++k)
        if (rep.resolved[k]) idx.push_back(k);
    std::ostringstream note;
    if (rep.n_resolved < 4) {
        note << "only " << rep.n_resolved << " samples resolved above the quadrature floor";
        rep.note = note.str();
        return rep;
    }
    size_t half = idx.size() / 2;
    for (size_t a = 0; a < idx.size(); ++a) {
        double e = rep.envelope[idx[a]];
        rep.envelope_constant = std::max(rep.envelope_constant, e);
        (a < half ? rep.inner_max : rep.outer_max) = std::max(a < half ? rep.inner_max : rep.outer_max, e);
    }
    rep.bounded = rep.outer_max <= kappa_b * rep.inner_max;
    rep.decreasing = rep.rho.back() < rep.rho.front();
    // Monotone decay is asserted in the asymptotic (outer) half only.
    for (size_t a = half + 1; a < idx.size(); ++a) {
        size_t i0 = idx[a - 1], i1 = idx[a];
        if (rep.rho[i1] > rep.rho[i0] + rep.floor[i0] + rep.floor[i1]) rep.decreasing = false;
    }
    rep.pass = rep.bounded && rep.decreasing;
    note << rep.n_resolved << " of " << rep.z.size() << " samples resolved; envelope constant " << rep.envelope_constant;
    rep.note = note.str();
    return rep;
}

int extraction_sample_count(int n, double kappa) {
    int N = static_cast<int>(std::lround(kappa * n));
    return 2 * (N + 1) + 40;
}

AmplitudeEstimate extract_phi1(const RaySamples& s, int n, const ExtractOptions& opt) {
    if (s.z.empty()) throw DomainError("extract_phi1: no samples");
    double r = s.r, h = r / n;
    int N = std::max(n, static_cast<int>(std::lround(opt.kappa * n)));
    double T = N * h;
    int K = static_cast<int>(s.z.size());
    int rows = s.phi[0].rows(), cols = s.phi[0].cols();
    Mat D(K, N + 1), Y(K, rows * cols);
    for (int k = 0; k < K; ++k) {
        cplx z = s.z[k];
        auto w = filon_weights(z, h, N);
        cplx iz = I1 * z;
        cplx eT = std::exp(iz * T);
        if (opt.tail) {
            w[N] += -eT / iz;
            cplx c = eT / (iz * iz);
            w[N] += c / h;
            w[N - 1] -= c / h;
        }
        cplx fac = s.hat ? -z : iz;
        for (int j = 0; j <= N; ++j) D(k, j) = fac * w[j];
        for (int p = 0; p < rows; ++p)
            for (int q = 0; q < cols; ++q) Y(k, p * cols + q) = s.phi[k](p, q);
    }
    double reg = opt.reg >= 0 ? opt.reg : opt.reg_scale * D.squaredNorm();
    Mat L = Mat::Zero(N - 1, N + 1);
    for (int i = 0; i < N - 1; ++i) {
        L(i, i) = 1;
        L(i, i + 1) = -2;
        L(i, i + 2) = 1;
    }
    Mat G(K + N - 1, N + 1), Rhs = Mat::Zero(K + N - 1, rows * cols);
    G << D, std::sqrt(reg) * L;
    Rhs.topRows(K) = Y;
    Eigen::ColPivHouseholderQR<Mat> qr(G);
    auto R = qr.matrixR().diagonal();
    double rmax = std::abs(R(0)), rmin = std::abs(R(std::min<long>(R.size(), N + 1) - 1));
    AmplitudeEstimate est;
    est.condition = rmax > 0 ? rmin / rmax : 0;
    if (!(est.condition > opt.min_rcond)) {
        std::ostringstream os;
        os << "extract_phi1: ill-posed design (rcond " << est.condition << "); widen the |z| range or steepen the ray";
        throw SingularError(os.str(), est.condition);
    }
    Mat X = qr.solve(Rhs);
    est.misfit = (D * X - Y).squaredNorm();
    est.fit_residual = est.misfit + reg * (L * X).squaredNorm();
    est.reg = reg;
    est.window = T;
    est.samples = K;
    est.grid = Grid(r, n);
    for (int j = 0; j <= n; ++j) {
        Mat v(rows, cols);
        for (int p = 0; p < rows; ++p)
            for (int q = 0; q < cols; ++q) v(p, q) = X(j, p * cols + q);
        est.values.push_back(v);
    }
    if (!s.hat) est.s39_residual = convolution_identity_residual(est.profile(), est.grid);
    return est;
}

MatrixProfile AmplitudeEstimate::profile() const { return profile_from_nodes(grid, values, "extracted_phi1"); }

double AmplitudeEstimate::l2_error(const std::function<Mat(double)>& f, double frac) const {
    double h = grid.h(), acc = 0;
    int last = static_cast<int>(std::floor(frac * grid.n + 1e-9));
    for (int j = 0; j <= last; ++j) {
        double w = (j == 0 || j == last) ? 0.5 * h : h;
        acc += w * (values[j] - f(grid.node(j))).squaredNorm();
    }
    return std::sqrt(acc);
}

double AmplitudeEstimate::max_error(const std::function<Mat(double)>& f, double frac) const {
    double worst = 0;
    int last = static_cast<int>(std::floor(frac * grid.n + 1e-9));
    for (int j = 0; j <= last; ++j) worst = std::max(worst, (values[j] - f(grid.node(j))).norm());
    return worst;
}

UniquenessReport uniqueness_probe(const std::function<Mat(double)>& a, const std::function<Mat(double)>& b, double r,
                                  const std::vector<cplx>& z, double tol) {
    UniquenessReport rep;
    rep.z = z;
    auto diff = [&](double t) { return Mat(a(t) - b(t)); };
    rep.l2_difference = std::sqrt(integrate_scalar([&](double t) { return cplx(diff(t).squaredNorm()); }, 0, r, 16, 12).real());
    for (cplx zk : z) {
        int panels = std::max(16, static_cast<int>(std::ceil(std::abs(zk) * r)));
        Mat w = integrate([&](double t) { return Mat(std::exp(I1 * zk * (t - r)) * diff(t)); }, 0.0, r, panels, 12);
        rep.omega.push_back(w.norm());
        rep.max_omega = std::max(rep.max_omega, w.norm());
    }
    rep.separated = rep.max_omega > tol;
    return rep;
}

std::function<Mat(cplx)> builtin_weyl(const std::string& name, int p) {
    Mat Id = Mat::Identity(p, p);
    if (name == "example65")
        return [Id](cplx lam) {
            cplx z = branch_sqrt(lam);
            return Mat(((1.0 - z) / (1.0 + z)) * Id);
        };
    if (name == "example64")
        return [Id](cplx lam) { return Mat((I1 / branch_sqrt(lam)) * Id); };
    if (name == "example23")
        return [Id](cplx lam) { return Mat(quadratic_roots(lam).zeta1 * Id); };
    throw DomainError("no builtin Weyl function for '" + name + "'");
}

} // namespace cansys
