#include "cansys/snode.hpp"

#include <cmath>
#include <sstream>

#include "cansys/structured.hpp"

namespace cansys {

namespace {

double node_identity(const SNode& s) {
    double h = s.grid.h();
    Mat lhs = s.A * s.S - s.S * s.A.adjoint();
    Mat rhs = (I1 * h) * (s.Pi * s.sig * s.Pi.adjoint());
    return op_norm(lhs - rhs);
}

void finish(SNode& s) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (s.S + s.S.adjoint()), Eigen::EigenvaluesOnly);
    s.min_eig_S = es.eigenvalues().minCoeff();
    s.identity_residual = node_identity(s);
}

Mat ones_column(int n, int b) {
    Mat o(n * b, b);
    for (int i = 0; i < n; ++i) o.block(i * b, 0, b, b) = Mat::Identity(b, b);
    return o;
}

} // namespace

SNode snode_from_E(const Mat& E, const CanonicalSystem& sys, const Grid& g) {
    int b = sys.m2();
    if (E.rows() != g.n * b || E.cols() != g.n * b) throw DomainError("snode_from_E: E has the wrong size");
    Eigen::PartialPivLU<Mat> lu(E);
    if (!(lu.rcond() > 1e-14)) throw SingularError("snode_from_E: E is singular", lu.rcond());
    SNode s;
    s.grid = g;
    s.b = b;
    s.sig = sys.signature();
    s.E = E;
    s.B = sample_mid(sys.beta, g);
    s.A = volterra_Atilde(g, b);
    Mat Einv = lu.inverse();
    s.S = Einv * Einv.adjoint();
    s.Sinv = E.adjoint() * E;
    s.Pi = lu.solve(s.B);
    finish(s);
    return s;
}

SNode snode_identity(const CanonicalSystem& sys, const Grid& g) {
    return snode_from_E(Mat::Identity(g.n * sys.m2(), g.n * sys.m2()), sys, g);
}

namespace {
int cells_for(const Grid& g, double ell) {
    double kd = ell / g.h();
    int k = static_cast<int>(std::lround(kd));
    if (std::abs(kd - k) > 1e-9 || k < 1 || k > g.n) {
        std::ostringstream os;
        os << "restrict: l = " << ell << " is not a grid node in (0, " << g.r << "]";
        throw DomainError(os.str());
    }
    return k;
}
} // namespace

SNode restrict_node(const SNode& node, double ell) {
    int k = cells_for(node.grid, ell);
    int d = k * node.b;
    SNode s;
    s.grid = node.grid.prefix(k);
    s.b = node.b;
    s.sig = node.sig;
    s.E = node.E.topLeftCorner(d, d);
    s.B = node.B.topRows(d);
    s.A = node.A.topLeftCorner(d, d);
    s.S = node.S.topLeftCorner(d, d);
    s.Sinv = s.E.adjoint() * s.E;
    s.Pi = node.Pi.topRows(d);
    finish(s);
    return s;
}

RestrictionCheck check_restriction(const SNode& full, double ell) {
    SNode s = restrict_node(full, ell);
    Mat Einv = s.E.inverse();
    RestrictionCheck c;
    c.s_residual = op_norm(s.S - Einv * Einv.adjoint());
    c.identity_residual = s.identity_residual;
    return c;
}

Transfer transfer_wA(const SNode& node, cplx mu) {
    int d = node.A.rows();
    Mat R = node.A - mu * Mat::Identity(d, d);
    Eigen::PartialPivLU<Mat> lu(R);
    Transfer t;
    t.rcond = lu.rcond();
    t.ill_conditioned = !(t.rcond > 1e-12);
    Mat X = lu.solve(node.Pi);
    int m = node.sig.rows();
    t.w = Mat::Identity(m, m) - (I1 * node.grid.h()) * (node.sig * (node.Pi.adjoint() * (node.Sinv * X)));
    return t;
}

FactorizationReport factorization_residual(const CanonicalSystem& sys, const SNode& node,
                                           const std::vector<double>& ells, const std::vector<cplx>& lams) {
    FactorizationReport rep;
    rep.ells = ells;
    rep.lams = lams;
    std::vector<SNode> restricted;
    std::vector<int> cells;
    for (double ell : ells) {
        restricted.push_back(restrict_node(node, ell));
        cells.push_back(cells_for(node.grid, ell));
    }
    std::vector<FundamentalSolution> fs;
    for (cplx lam : lams) fs.push_back(integrate_fundamental(sys, lam, node.grid));
    for (size_t a = 0; a < ells.size(); ++a)
        for (size_t l = 0; l < lams.size(); ++l) {
            Mat w = transfer_wA(restricted[a], 1.0 / lams[l]).w;
            double r = op_norm(fs[l].W[cells[a]] - w);
            rep.residual.push_back(r);
            rep.worst = std::max(rep.worst, r);
        }
    return rep;
}

double identity_M1_residual(const SNode& node, cplx lam, const Mat* W) {
    int d = node.A.rows();
    Mat Wm = W ? *W : transfer_wA(node, 1.0 / lam).w;
    Mat Id = Mat::Identity(d, d);
    Mat X = Eigen::PartialPivLU<Mat>(Id - lam * node.A).solve(node.Pi);
    Mat lhs = Wm.adjoint() * node.sig * Wm - node.sig;
    Mat rhs = (I1 * (lam - std::conj(lam)) * node.grid.h()) * (X.adjoint() * node.Sinv * X);
    return op_norm(lhs - rhs);
}

ResolventReport resolvent_closed_forms(cplx z, const Grid& g, const MatrixProfile& Phi1) {
    int b = Phi1.rows(), n = g.n;
    double h = g.h(), r = g.r;
    ResolventReport rep;
    rep.z = z;
    int d = n * b;
    Mat Id = Mat::Identity(d, d);
    Mat At = volterra_Atilde(g, b);
    Eigen::PartialPivLU<Mat> lu(Id - z * z * At);
    Mat inv = lu.inverse();
    KernelFn k;
    k.b = b;
    k.domain = KernelDomain::triangle;
    k.k = [z, b](double x, double t) {
        return Mat((I1 * z / 2.0) * (std::exp(I1 * z * (x - t)) - std::exp(I1 * z * (t - x))) * Mat::Identity(b, b));
    };
    Mat formula = Id + assemble_integral_operator(k, g).M;
    rep.m4_residual = op_norm(inv - formula);

    Mat one = ones_column(n, b);
    Mat c = inv * one;
    for (int i = 0; i < n; ++i)
        rep.m5_residual =
            std::max(rep.m5_residual, (cell(c, i, b) - std::cos(z * g.mid(i)) * Mat::Identity(b, b)).norm());

    rep.m6_discrete = (h * (one.adjoint() * c))(0, 0);
    rep.m6_closed = std::abs(z) > 0 ? std::sin(z * r) / z : cplx(r);
    rep.m6_error = std::abs(rep.m6_discrete - rep.m6_closed);

    Mat P = sample_mid(Phi1, g);
    Mat m7d = h * (one.adjoint() * (inv * P));
    Mat m7c = 0.5 * integrate([&](double t) {
                  return Mat((std::exp(I1 * z * (r - t)) + std::exp(I1 * z * (t - r))) * Phi1.value(t));
              }, 0.0, r, 8, 12);
    rep.m7_error = (m7d - m7c).norm();

    cplx q = std::exp(2.0 * I1 * z * r);
    rep.m8_ratio = 2.0 * std::abs(q) / std::abs(q - 1.0);
    return rep;
}

} // namespace cansys
