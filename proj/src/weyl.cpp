#include "cansys/weyl.hpp"

#include <cmath>
#include <sstream>

namespace cansys {

PropertyJPair constant_pair(const Mat& P1, const Mat& P2) {
    return {[P1](cplx) { return P1; }, [P2](cplx) { return P2; }, "constant"};
}

PropertyJPair example23_pair(double r, const Mat& alpha, double c) {
    int p = alpha.rows();
    return {[=](cplx) { return Mat(std::exp(-I1 * c * r) * Mat::Identity(p, p)); },
            [=](cplx lam) { return Mat(std::exp(I1 * c * r) * quadratic_roots(lam).zeta1 * alpha); },
            "example23_pair"};
}

PairCheck check_pair(const PropertyJPair& pair, const Mat& sig, cplx lam) {
    Mat P1 = pair.P1(lam), P2 = pair.P2(lam);
    Mat P(P1.rows() + P2.rows(), P1.cols());
    P << P1, P2;
    Mat nd = P.adjoint() * P;
    Mat sg = P.adjoint() * sig * P;
    PairCheck c;
    c.min_nondegeneracy = Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (nd + nd.adjoint())).eigenvalues().minCoeff();
    double sc = std::max(1.0, nd.norm());
    c.min_signature = Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (sg + sg.adjoint())).eigenvalues().minCoeff() / sc;
    c.pass = c.min_nondegeneracy > 1e-12 && c.min_signature >= -1e-12;
    return c;
}

Mat mobius(const Mat& Winv, const Mat& P1, const Mat& P2, bool hat, double min_rcond) {
    int m1 = P1.rows();
    int m2 = Winv.rows() - m1;
    Mat num = Winv.block(m1, 0, m2, m1) * P1 + Winv.block(m1, m1, m2, m2) * P2;
    Mat den = Winv.block(0, 0, m1, m1) * P1 + Winv.block(0, m1, m1, m2) * P2;
    Eigen::PartialPivLU<Mat> lu(den);
    double rc = lu.rcond();
    if (!(rc > min_rcond)) {
        std::ostringstream os;
        os << "mobius: denominator singular (rcond " << rc << ")";
        throw SingularError(os.str(), rc);
    }
    Mat phi = num * lu.inverse();
    return hat ? Mat(I1 * phi) : phi;
}

double disk_inequality_residual(const Mat& W, const Mat& phi, const Mat& sig, bool hat) {
    int m1 = phi.cols();
    Mat v(W.cols(), m1);
    if (hat)
        v << Mat::Identity(m1, m1), -I1 * phi;
    else
        v << Mat::Identity(m1, m1), phi;
    Mat Wv = W * v;
    Mat f = Wv.adjoint() * sig * Wv;
    return Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (f + f.adjoint())).eigenvalues().minCoeff();
}

std::vector<cplx> default_lambda_grid() {
    std::vector<cplx> out;
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b) out.emplace_back(-5.0 + 2.5 * a, std::pow(10.0, -1.0 + 0.5 * b));
    return out;
}

WeylSample weyl_samples(const CanonicalSystem& sys, const PropertyJPair& pair, const std::vector<cplx>& lams, double r,
                        int n) {
    WeylSample ws;
    ws.r = r;
    ws.hat = sys.hat;
    ws.provenance = sys.name + "/" + pair.provenance;
    Grid g(r, n);
    Mat s = sys.signature();
    for (cplx lam : lams) {
        auto fs = integrate_fundamental(sys, lam, g);
        ws.lams.push_back(lam);
        try {
            Mat phi = mobius(fs.Winv, pair.P1(lam), pair.P2(lam), sys.hat);
            ws.phi.push_back(phi);
            ws.min_eig.push_back(disk_inequality_residual(fs.end(), phi, s, sys.hat));
            ws.singular.push_back(false);
        } catch (const SingularError&) {
            ws.phi.push_back(Mat::Constant(sys.sig.m2, sys.sig.m1, cplx(NAN, NAN)));
            ws.min_eig.push_back(NAN);
            ws.singular.push_back(true);
        }
    }
    return ws;
}

double contraction_norm(const Mat& phi) { return op_norm(phi); }

double herglotz_min_eig(const Mat& phihat) {
    Mat im = (phihat - phihat.adjoint()) / (2.0 * I1);
    return Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (im + im.adjoint())).eigenvalues().minCoeff();
}

NestednessReport nestedness_check(const CanonicalSystem& sys, const PropertyJPair& pair, double r1, double r2,
                                  const std::vector<cplx>& lams, int n, double tol,
                                  const std::function<Mat(cplx)>& phi_fn) {
    if (!(r1 > 0) || r1 > r2) throw DomainError("nestedness_check: need 0 < r1 <= r2");
    Grid g(r2, n);
    double k1d = r1 / g.h();
    int k1 = static_cast<int>(std::lround(k1d));
    if (std::abs(k1d - k1) > 1e-9) throw DomainError("nestedness_check: r1 must be a grid node of the r2 grid");
    NestednessReport rep;
    rep.pass = true;
    Mat s = sys.signature();
    for (cplx lam : lams) {
        auto fs = integrate_fundamental(sys, lam, g);
        Mat phi = phi_fn ? phi_fn(lam) : mobius(fs.Winv, pair.P1(lam), pair.P2(lam), sys.hat);
        double e2 = disk_inequality_residual(fs.end(), phi, s, sys.hat);
        double e1 = disk_inequality_residual(fs.W[k1], phi, s, sys.hat);
        rep.min_eig_r1.push_back(e1);
        rep.min_eig_r2.push_back(e2);
        rep.worst = std::min({rep.worst, e1, e2});
        if (e1 < -tol || e2 < -tol) rep.pass = false;
    }
    std::ostringstream os;
    os << "finite r-set {" << r1 << ", " << r2 << "}";
    rep.certified = os.str();
    return rep;
}

SummabilityReport summability_partial(const CanonicalSystem& sys, const Mat& phi, cplx lam, const std::vector<double>& R,
                                      int cells_per_unit) {
    SummabilityReport rep;
    if (R.empty()) return rep;
    double Rmax = R.back();
    int n = std::max(2, static_cast<int>(std::ceil(Rmax * cells_per_unit)));
    Grid g(Rmax, n);
    auto fs = integrate_fundamental(sys, lam, g);
    int m1 = phi.cols();
    Mat v(sys.m(), m1);
    v << Mat::Identity(m1, m1), phi;
    std::vector<double> f(n + 1);
    for (int k = 0; k <= n; ++k) {
        Mat Wv = fs.W[k] * v;
        f[k] = (Wv.adjoint() * sys.H(g.node(k)) * Wv).trace().real();
    }
    double acc = 0;
    size_t next = 0;
    for (int k = 0; k <= n && next < R.size(); ++k) {
        if (k > 0) acc += 0.5 * g.h() * (f[k - 1] + f[k]);
        while (next < R.size() && g.node(k) >= R[next] - 1e-12) {
            rep.R.push_back(R[next]);
            rep.I.push_back(acc);
            ++next;
        }
    }
    rep.bounded = true;
    for (size_t i = 2; i < rep.I.size(); ++i) {
        double d0 = rep.I[i - 1] - rep.I[i - 2], d1 = rep.I[i] - rep.I[i - 1];
        double ratio = d0 > 0 ? d1 / d0 : (d1 > 0 ? INFINITY : 0.0);
        rep.increment_ratio.push_back(ratio);
        if (!(ratio < 1)) rep.bounded = false;
    }
    return rep;
}

Mat cayley(const Mat& phi) {
    int p = phi.rows();
    Mat Id = Mat::Identity(p, p);
    Eigen::PartialPivLU<Mat> lu(Id - phi);
    if (!(lu.rcond() > 1e-14)) throw SingularError("cayley: I - phi is singular (boundary of the disk)", lu.rcond());
    return I1 * (Id + phi) * lu.inverse();
}

Mat cayley_inverse(const Mat& phihat) {
    int p = phihat.rows();
    Mat Id = Mat::Identity(p, p);
    Eigen::PartialPivLU<Mat> lu(phihat + I1 * Id);
    if (!(lu.rcond() > 1e-14)) throw SingularError("cayley_inverse: phihat + iI is singular", lu.rcond());
    return lu.inverse() * (phihat - I1 * Id);
}

} // namespace cansys
