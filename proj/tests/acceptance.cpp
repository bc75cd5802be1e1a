// Acceptance run: one PASS/FAIL line per criterion.  Exit status is 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "cansys/asymptotics.hpp"
#include "cansys/snode.hpp"
#include "cansys/structured.hpp"
#include "cansys/transform.hpp"
#include "cansys/weyl.hpp"

using namespace cansys;

namespace {

constexpr double kValidateTol = 1e-12;
constexpr double kValidateSeconds = 1.0;
constexpr double kFundamentalTol = 1e-5;
constexpr double kSlopeLo = 1.7, kSlopeHi = 2.3;
constexpr double kFundamentalSeconds = 10.0;
constexpr double kJRealTol = 1e-12, kJComplexTol = 1e-5;
constexpr double kWeylTol = 1e-8;
constexpr int kWeylN = 1024;
constexpr double kRootTol = 1e-12;
constexpr int kRootSamples = 100;
constexpr double kIdentitySeconds = 30.0;
constexpr double kGapRatio = 1e6;
constexpr double kConvTol = 1e-6, kWitnessTol = 1e-3;
constexpr double kFactorTol = 1e-3;
constexpr double kHatRelTol = 1e-3;
constexpr double kExtractL2 = 1e-2, kEMax = 1e-2, kAgree = 5e-2;
constexpr double kExtractSeconds = 60.0;
constexpr double kV1Tol = 1e-8;
constexpr double kCausalTol = 1e-8;
constexpr std::uint32_t kSeed = 20240611;

const std::vector<cplx> kLams{I1, cplx(1, 1), 4.0 * I1};
const std::vector<int> kRefine{32, 64, 128, 256};

struct Outcome {
    bool pass = true;
    std::ostringstream note;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            note << " [violated: " << what << "]";
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double slope(const std::vector<int>& n, const std::vector<double>& e) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = static_cast<int>(n.size());
    for (int i = 0; i < m; ++i) {
        double x = std::log(double(n[i])), y = std::log(e[i]);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    return -(m * sxy - sx * sy) / (m * sxx - sx * sx);
}

double sup_error(const FundamentalSolution& a, const FundamentalSolution& b, double* rel = nullptr) {
    double e = 0, r = 0;
    for (size_t k = 0; k < a.W.size(); ++k) {
        double d = (a.W[k] - b.W[k]).norm();
        e = std::max(e, d);
        r = std::max(r, d / b.W[k].norm());
    }
    if (rel) *rel = r;
    return e;
}

FundamentalSolution closed_form(const std::string& name, const std::vector<double>& xs, cplx lam) {
    if (name == "example23") return closed_form_example23(xs, lam, Mat::Identity(1, 1));
    return closed_form_example64(xs, lam);
}

// ---------------------------------------------------------------- criteria

void c1(Outcome& o) {
    auto t0 = std::chrono::steady_clock::now();
    Grid g(1.0, 256);
    for (auto name : {"example23", "example64"}) {
        auto v = validate_beta(builtin_system(name, 1.0), g, kValidateTol);
        o.note << " " << name << ": flat=" << v.flat_residual << " deriv=" << v.deriv_residual;
        o.require(v.pass, std::string(name) + " valid");
    }
    auto bad = validate_beta(builtin_system("constant", 1.0), g, kValidateTol);
    o.note << " constant: deriv=" << bad.deriv_residual;
    o.require(!bad.pass, "constant profile rejected");
    double t = seconds_since(t0);
    o.note << " t=" << t << "s";
    o.require(t < kValidateSeconds, "runtime");
}

void c2(Outcome& o) {
    auto t0 = std::chrono::steady_clock::now();
    for (auto name : {"example23", "example64"}) {
        auto sys = builtin_system(name, 1.0);
        for (cplx lam : kLams) {
            std::vector<double> e;
            double rel = 0;
            for (int n : kRefine) {
                Grid g(1.0, n);
                auto W = integrate_fundamental(sys, lam, g);
                e.push_back(sup_error(W, closed_form(name, W.x, lam), &rel));
            }
            double p = slope(kRefine, e);
            o.note << " " << name << "@" << lam << ": err=" << e.back() << " rel=" << rel << " slope=" << p;
            std::ostringstream w;
            w << name << " lam=" << lam;
            o.require(e.back() < kFundamentalTol, "sup error " + w.str());
            o.require(p >= kSlopeLo && p <= kSlopeHi, "slope " + w.str());
        }
    }
    double t = seconds_since(t0);
    o.note << " t=" << t << "s";
    o.require(t < kFundamentalSeconds, "runtime");
}

void c3(Outcome& o) {
    Grid g(1.0, 256);
    double wr = 0, wc = 0;
    for (auto name : {"example23", "example64"}) {
        auto sys = builtin_system(name, 1.0);
        for (double lam : {-5.0, -2.5, -1.0, 0.5, 1.0, 2.5, 5.0}) wr = std::max(wr, integrate_fundamental(sys, lam, g).j_residual);
        for (cplx lam : kLams) wc = std::max(wc, integrate_fundamental(sys, lam, g).j_residual);
    }
    o.note << " real=" << wr << " complex=" << wc;
    o.require(wr < kJRealTol, "real lambda");
    o.require(wc < kJComplexTol, "complex lambda");
}

void c4(Outcome& o) {
    auto sys = builtin_system("example23", 1.0);
    Mat sig = sys.signature();
    auto lams = default_lambda_grid();
    double worst1 = 1e300;
    int caught = 0, total = 0;
    for (double r : {0.5, 1.0, 2.0}) {
        Grid g(r, kWeylN);
        for (cplx lam : lams) {
            Mat Wr = integrate_fundamental(sys, lam, g).end();
            auto q = quadratic_roots(lam);
            worst1 = std::min(worst1, disk_inequality_residual(Wr, Mat::Constant(1, 1, q.zeta1), sig));
            ++total;
            if (disk_inequality_residual(Wr, Mat::Constant(1, 1, q.zeta2), sig) < -kWeylTol) ++caught;
        }
    }
    o.note << " zeta1 min_eig=" << worst1 << " zeta2 rejected " << caught << "/" << total;
    o.require(worst1 >= -kWeylTol, "zeta1 membership");
    o.require(caught == total, "zeta2 rejected everywhere");
    for (auto [r1, r2] : {std::pair{0.5, 1.0}, {1.0, 2.0}}) {
        auto nr = nestedness_check(sys, example23_pair(r2, Mat::Identity(1, 1)), r1, r2, lams, kWeylN, kWeylTol);
        o.note << " nested(" << r1 << "," << r2 << ")=" << nr.worst;
        o.require(nr.pass, "nestedness");
    }
}

void c5(Outcome& o) {
    std::mt19937 rng(kSeed);
    std::uniform_real_distribution<double> ur(-10, 10), ui(-3, 1);
    double prod = 0, sum = 0, mod = 0;
    for (int k = 0; k < kRootSamples; ++k) {
        cplx lam(ur(rng), std::pow(10.0, ui(rng)));
        auto q = quadratic_roots(lam);
        prod = std::max(prod, std::abs(q.zeta1 * q.zeta2 - 1.0));
        sum = std::max(sum, std::abs(q.zeta1 + q.zeta2 + 2.0 + 1.0 / lam));
        mod = std::max(mod, std::abs(q.zeta1));
    }
    o.note << " |z1 z2 - 1|=" << prod << " |z1 + z2 + 2 + 1/lam|=" << sum << " 1-max|z1|=" << 1.0 - mod;
    o.require(prod < kRootTol, "product");
    o.require(sum < kRootTol, "sum");
    o.require(mod < 1.0, "|zeta1| < 1");
}

void c6(Outcome& o) {
    auto t0 = std::chrono::steady_clock::now();
    auto check = [&](const std::string& what, const std::function<double(const Grid&)>& res) {
        std::vector<double> e;
        for (int n : kRefine) e.push_back(res(Grid(1.0, n)));
        double p = slope(kRefine, e);
        o.note << " " << what << ": " << e.back() << " slope=" << p;
        o.require(p >= kSlopeLo && p <= kSlopeHi, what + " slope");
    };
    auto P = amplitude_profile("example65");
    check("Z-kernel", [&](const Grid& g) { return residual_identity_S4(operator_Z_from_Phi1(P, g), assemble_PijPi(P, g)); });
    check("integrated-amplitude S0", [](const Grid& g) { return example46_operator(amplitude_profile("expreal"), g).residual; });
    check("sum-kernel Z", [](const Grid& g) { return example45_residual(amplitude_profile("cos"), g); });
    check("rank example", [](const Grid& g) { return example47_check(amplitude_profile("exp"), g).residual; });
    auto rk = example47_check(amplitude_profile("exp"), Grid(1.0, 256));
    o.note << " rank=" << rk.rank << " gap=" << rk.gap_ratio;
    o.require(rk.rank <= 2, "rank <= 2 m2");
    o.require(rk.gap_ratio > kGapRatio, "gap ratio");
    double t = seconds_since(t0);
    o.note << " t=" << t << "s";
    o.require(t < kIdentitySeconds, "runtime");
}

void c7(Outcome& o) {
    Grid g(1.0, 256);
    double one = convolution_identity_residual(amplitude_profile("one"), g);
    double f65 = convolution_identity_residual(amplitude_profile("example65"), g);
    double w = convolution_identity_residual(amplitude_profile("exp"), g);
    double expect = 1.0 - std::sin(1.0);
    o.note << " one=" << one << " 2e^{it}-1=" << f65 << " witness=" << w << " expected=" << expect;
    o.require(one < kConvTol, "Phi1 = 1");
    o.require(f65 < kConvTol, "Phi1 = 2e^{it}-1");
    o.require(std::abs(w - expect) < kWitnessTol, "witness");
}

void c8(Outcome& o) {
    auto sys = builtin_system("example64", 1.0);
    Grid g(1.0, 256);
    auto fr = factorization_residual(sys, snode_identity(sys, g), {0.25, 0.5, 1.0}, kLams);
    o.note << " worst=" << fr.worst;
    o.require(fr.worst < kFactorTol, "factorization");
}

void c9(Outcome& o) {
    Grid g(1.0, 1024);
    auto zs = ray_points(M_PI / 4, 2, 200, 40);
    auto s65 = sample_ray(builtin_weyl("example65"), 1.0, false, zs);
    auto a = verify_asymptotics(s65, sample_nodes(amplitude_profile("example65"), g), g.h());
    o.note << " example65: " << a.note;
    o.require(a.pass, "example65 envelope");
    auto hat = [](cplx lam) {
        auto c = closed_form_example64({1.0}, lam);
        return mobius(c.Winv, Mat::Identity(1, 1), Mat::Identity(1, 1), true);
    };
    auto s64 = sample_ray(hat, 1.0, true, zs);
    auto b = verify_asymptotics(s64, sample_nodes(amplitude_profile("example64"), g), g.h());
    o.note << " example64: " << b.note;
    o.require(b.pass, "example64 envelope");
    cplx z = std::polar(100.0, M_PI / 4);
    double rel = std::abs(hat(z * z)(0, 0) - I1 / z) / std::abs(I1 / z);
    o.note << " |phihat - i/z|/|i/z|=" << rel;
    o.require(rel < kHatRelTol, "hat asymptote");
}

void c10(Outcome& o) {
    auto t0 = std::chrono::steady_clock::now();
    auto f65 = [](double t) { return Mat::Constant(1, 1, 2.0 * std::exp(I1 * t) - 1.0); };
    int n = 64;
    auto s = sample_ray(builtin_weyl("example65"), 1.0, false, ray_points(M_PI / 4, 2, 200, extraction_sample_count(n)));
    auto est = extract_phi1(s, n);
    double l2 = est.l2_error(f65, 0.8);
    Grid g(1.0, 256);
    auto e = discrete_normalized_E(builtin_system("example65", 1.0), g, 0);
    double emax = 0;
    for (int j = 0; j <= g.n; ++j) emax = std::max(emax, (e.Phi1_nodes[j] - f65(g.node(j))).norm());
    double agree = 0;
    int step = g.n / n;
    for (int j = 0; j <= n; ++j) {
        if (est.grid.node(j) > 0.8 + 1e-12) break;
        agree = std::max(agree, (est.values[j] - e.Phi1_nodes[j * step]).norm());
    }
    o.note << " extract L2=" << l2 << " E max=" << emax << " agreement=" << agree;
    o.require(l2 < kExtractL2, "extraction");
    o.require(emax < kEMax, "normalized E");
    o.require(agree < kAgree, "agreement");
    double t = seconds_since(t0);
    o.note << " t=" << t << "s";
    o.require(t < kExtractSeconds, "runtime");
}

void c11(Outcome& o) {
    auto unit = builtin_series("unit");
    double v1 = 0;
    for (int i = 0; i <= 10; ++i)
        for (int j = 0; j <= i; ++j) {
            double x = i / 10.0, z = j / 10.0;
            v1 = std::max(v1, std::abs(series_V1(unit, x, z)(0, 0) - x / 2));
        }
    o.note << " V1 err=" << v1;
    o.require(v1 < kV1Tol, "V1 = x/2");
    for (auto name : {"unit", "h-only", "mixed"}) {
        auto s = series_sum(builtin_series(name), 4);
        double worst = 0;
        for (double q : s.bound_ratio) worst = std::max(worst, q);
        o.note << " " << name << " max ratio=" << worst;
        o.require(s.bound_holds, std::string(name) + " bound");
    }
    auto z = series_sum(builtin_series("zero"), 4);
    double zmax = 0;
    for (double m : z.max_norm) zmax = std::max(zmax, m);
    o.note << " zero max=" << zmax;
    o.require(zmax == 0.0 && z.sum(0.7, 0.3).norm() == 0.0, "zero data");
}

void c12(Outcome& o) {
    Grid g(1.0, 128);
    double ell = 0.5, dphi = 0, dw = 0;
    int k = 64;
    auto base = builtin_system("admissible", 1.0);
    auto pert = builtin_system("admissible", 1.0, {{"tail_eps", 5.0}, {"tail_ell", ell}});
    double moved = (base.beta.value(0.95) - pert.beta.value(0.95)).norm();
    auto e0 = discrete_normalized_E(base, g, 0), e1 = discrete_normalized_E(pert, g, 0);
    dphi = (e0.Phi1.topRows(k) - e1.Phi1.topRows(k)).cwiseAbs().maxCoeff();
    auto n0 = restrict_node(snode_from_E(e0.E.M, base, g), ell);
    auto n1 = restrict_node(snode_from_E(e1.E.M, pert, g), ell);
    for (cplx lam : kLams) dw = std::max(dw, (transfer_wA(n0, 1.0 / lam).w - transfer_wA(n1, 1.0 / lam).w).norm());
    double dfull = (e0.Phi1.bottomRows(g.n - k) - e1.Phi1.bottomRows(g.n - k)).cwiseAbs().maxCoeff();
    o.note << " beta moved by " << moved << " on (l,r]; dPhi1=" << dphi << " dw_A=" << dw << " (beyond l: " << dfull << ")";
    o.require(moved > 1e-3, "perturbation is visible");
    o.require(dphi < kCausalTol, "Phi1 on [0,l]");
    o.require(dw < kCausalTol, "w_A(l)");
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, void (*)(Outcome&)>> criteria{
        {"constraint validation", c1},   {"fundamental solution vs closed forms", c2},
        {"j-relation", c3},              {"Weyl membership and nestedness", c4},
        {"root identities", c5},         {"operator identities", c6},
        {"convolution identity", c7},    {"factorization", c8},
        {"high-energy asymptotics", c9}, {"amplitude recovery", c10},
        {"similarity series", c11},      {"causality", c12},
    };
    int failed = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        o.note.precision(3);
        try {
            criteria[i].second(o);
        } catch (const std::exception& ex) {
            o.pass = false;
            o.note << " [exception: " << ex.what() << "]";
        }
        if (!o.pass) ++failed;
        std::printf("%s %zu %s:%s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.note.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
