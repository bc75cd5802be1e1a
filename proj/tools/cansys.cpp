#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cansys/asymptotics.hpp"
#include "cansys/io.hpp"
#include "cansys/snode.hpp"
#include "cansys/structured.hpp"
#include "cansys/system.hpp"
#include "cansys/transform.hpp"
#include "cansys/weyl.hpp"

using namespace cansys;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* kVersion = "cansys 0.4.0";

struct Output {
    bool json = false, csv = false, timing = false;
    unsigned seed = 20240611;
    std::string dir, config;
} out;

json cj(cplx z) { return json::array({z.real(), z.imag()}); }

json mj(const Mat& m) {
    json re = json::array(), im = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json a = json::array(), b = json::array();
        for (int k = 0; k < m.cols(); ++k) {
            a.push_back(m(i, k).real());
            b.push_back(m(i, k).imag());
        }
        re.push_back(a);
        im.push_back(b);
    }
    return {{"re", re}, {"im", im}};
}

std::string out_dir() {
    if (!out.dir.empty()) return out.dir;
    const char* e = std::getenv("CANSYS_OUT");
    return e && *e ? e : ".";
}

void write_atomic(const std::string& name, const std::string& content) {
    fs::path dir = out_dir();
    fs::create_directories(dir);
    fs::path target = dir / name, tmp = dir / (name + ".tmp");
    {
        std::ofstream f(tmp);
        if (!f) throw Error("cannot write '" + tmp.string() + "'");
        f << content;
    }
    fs::rename(tmp, target);
}

void emit_csv(const std::string& name, const CsvTable& t) {
    if (!out.csv) return;
    std::ostringstream os;
    write_series_csv(os, t);
    write_atomic(name, os.str());
}

struct Common {
    std::string profile;
    double r = 1.0;
    int n = 256;
    double tol = -1;
    int m1 = -1;
    bool hat = false;
    std::vector<std::string> params;
};

void add_common(CLI::App* s, Common& c, int n_default) {
    c.n = n_default;
    s->add_option("--profile", c.profile, "builtin name or Profile-CSV file");
    s->add_option("--r", c.r, "interval length")->capture_default_str();
    s->add_option("--n", c.n, "grid cells")->capture_default_str();
    s->add_option("--tol", c.tol, "pass tolerance (check-specific default)");
    s->add_option("--param", c.params, "builtin parameter key=value (repeatable)");
    s->add_option("--m1", c.m1, "m1 for a Profile-CSV beta (default cols - rows)");
    s->add_flag("--hat", c.hat, "use the J signature for a Profile-CSV beta");
}

double tol_or(const Common& c, double d) { return c.tol > 0 ? c.tol : d; }

Grid make_grid(double r, int n) {
    if (!(r > 0)) throw DomainError("r must be positive");
    if (n < 8) throw DomainError("n must be at least 8");
    return Grid(r, n);
}

std::map<std::string, double> param_map(const std::vector<std::string>& ps) {
    std::map<std::string, double> m;
    for (auto& p : ps) {
        auto eq = p.find('=');
        if (eq == std::string::npos) throw FormatError("--param expects key=value, got '" + p + "'");
        m[p.substr(0, eq)] = parse_double_list(p.substr(eq + 1)).at(0);
    }
    return m;
}

bool is_builtin_system(const std::string& s) {
    for (auto& b : builtin_names())
        if (b == s) return true;
    return false;
}

CanonicalSystem load_system(const Common& c, const std::string& fallback, json& rep) {
    std::string name = c.profile.empty() ? fallback : c.profile;
    rep["inputs"]["profile"] = name;
    if (is_builtin_system(name)) return builtin_system(name, c.r, param_map(c.params));
    if (!fs::exists(name)) throw DomainError("unknown profile '" + name + "'");
    auto lp = read_profile_file(name);
    for (auto& w : lp.warnings) rep["warnings"].push_back(w);
    CanonicalSystem sys;
    int rows = lp.profile.rows(), cols = lp.profile.cols();
    sys.sig.m2 = rows;
    sys.sig.m1 = c.m1 >= 0 ? c.m1 : cols - rows;
    if (sys.sig.m() != cols) throw FormatError("profile columns do not match m1 + m2");
    sys.beta = lp.profile;
    sys.r = c.r;
    sys.hat = c.hat;
    sys.name = name;
    return sys;
}

MatrixProfile load_amplitude(const std::string& name, json& rep) {
    rep["inputs"]["profile"] = name;
    if (fs::exists(name)) {
        auto lp = read_profile_file(name);
        for (auto& w : lp.warnings) rep["warnings"].push_back(w);
        return lp.profile;
    }
    return amplitude_profile(name);
}

Mat example23_alpha(const std::map<std::string, double>& par) {
    int p = par.count("p") ? static_cast<int>(par.at("p")) : 1;
    double ph = par.count("alpha_phase") ? par.at("alpha_phase") : 0.0;
    return std::exp(I1 * ph) * Mat::Identity(p, p);
}
double example23_c(const std::map<std::string, double>& par) { return par.count("c") ? par.at("c") : 0.5; }

std::vector<cplx> lambda_list(const std::string& s, const std::vector<cplx>& d) {
    return s.empty() ? d : parse_complex_list(s);
}

json residual_check(const std::string& name, double residual, double tol) {
    return {{"check", name}, {"residual", residual}, {"tol", tol}, {"pass", residual < tol}};
}

// validate-beta

json run_validate(const Common& c, const std::string& export_name = "") {
    json rep = {{"check", "validate-beta"}};
    auto sys = load_system(c, "example23", rep);
    Grid g = make_grid(c.r, c.n);
    double tol = tol_or(c, 1e-12);
    auto v = validate_beta(sys, g, tol);
    rep["n"] = c.n;
    rep["r"] = c.r;
    rep["residuals"] = {{"flat", v.flat_residual},
                        {"derivative", v.deriv_residual},
                        {"min_eig_H", v.min_eig_H},
                        {"value_consistency", v.consistency.value_defect},
                        {"d1_consistency", v.consistency.d1_defect}};
    rep["tol"] = tol;
    rep["pass"] = v.pass;
    if (!export_name.empty()) {
        std::ostringstream os;
        write_profile_csv(os, sys.beta, g);
        write_atomic(export_name, os.str());
        rep["exported"] = export_name;
    }
    return rep;
}

// fundamental

json run_fundamental(const Common& c, const std::string& lams_s) {
    json rep = {{"check", "fundamental"}};
    auto sys = load_system(c, "example23", rep);
    Grid g = make_grid(c.r, c.n);
    double tol = tol_or(c, 1e-5);
    auto par = param_map(c.params);
    auto lams = lambda_list(lams_s, {I1, cplx(1, 1), 4.0 * I1});
    bool pass = true;
    int idx = 0;
    for (cplx lam : lams) {
        auto W = integrate_fundamental(sys, lam, g);
        json e = {{"lambda", cj(lam)}, {"j_residual", W.j_residual}, {"inverse_residual", W.inverse_residual}};
        bool ok = W.j_residual < tol;
        std::optional<FundamentalSolution> closed;
        if (sys.name == "example23") {
            closed = closed_form_example23(W.x, lam, example23_alpha(par), example23_c(par));
            e["real_axis_branch"] = quadratic_roots(lam).real_axis_branch;
        } else if (sys.name == "example64") {
            closed = closed_form_example64(W.x, lam, par.count("p") ? static_cast<int>(par.at("p")) : 1);
        }
        if (closed) {
            double err = 0;
            for (size_t k = 0; k < W.W.size(); ++k) err = std::max(err, (W.W[k] - closed->W[k]).norm());
            e["closed_form_error"] = err;
            ok = ok && err < tol;
        }
        e["pass"] = ok;
        pass = pass && ok;
        rep["lambdas"].push_back(e);
        CsvTable t;
        t.lead = {"x"};
        t.name = "W";
        t.rows = t.cols = static_cast<int>(W.sig.rows());
        for (size_t k = 0; k < W.W.size(); ++k) {
            t.lead_values.push_back({W.x[k]});
            t.values.push_back(W.W[k]);
        }
        emit_csv("fundamental_" + std::to_string(idx++) + ".csv", t);
    }
    rep["n"] = c.n;
    rep["tol"] = tol;
    rep["pass"] = pass;
    return rep;
}

// weyl

struct WeylOpts {
    std::string pair, lams, rset, phi;
};

PropertyJPair load_pair(const std::string& spec, double r, const CanonicalSystem& sys) {
    if (spec.empty() || spec == "example23_pair") {
        if (spec.empty() && sys.name != "example23") throw DomainError("weyl: --pair is required for this profile");
        return example23_pair(r, Mat::Identity(sys.m2(), sys.m2()), 0.5);
    }
    std::ifstream f(spec);
    if (!f) throw FormatError("cannot open pair file '" + spec + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_pair_json(ss.str(), r);
}

json run_weyl(const Common& c, const WeylOpts& o) {
    json rep = {{"check", "weyl"}};
    auto sys = load_system(c, "example23", rep);
    auto par = param_map(c.params);
    double tol = tol_or(c, 1e-8);
    auto lams = lambda_list(o.lams, default_lambda_grid());
    auto rs = o.rset.empty() ? std::vector<double>{c.r} : parse_double_list(o.rset);
    Mat sig = sys.signature();
    std::function<Mat(cplx)> phi;
    if (!o.phi.empty()) {
        if (sys.name != "example23") throw DomainError("weyl: --phi is available for example23 only");
        Mat alpha = example23_alpha(par);
        bool first = o.phi == "zeta1";
        if (!first && o.phi != "zeta2") throw DomainError("weyl: --phi must be zeta1 or zeta2");
        phi = [alpha, first](cplx lam) {
            auto q = quadratic_roots(lam);
            return Mat((first ? q.zeta1 : q.zeta2) * alpha);
        };
    }
    bool pass = true;
    double worst = std::numeric_limits<double>::infinity();
    for (size_t ri = 0; ri < rs.size(); ++ri) {
        double r = rs[ri];
        Grid g = make_grid(r, c.n);
        CsvTable t;
        t.lead = {"re_lam", "im_lam"};
        t.name = "phi";
        t.trail = {"min_eig"};
        std::vector<Mat> phis;
        std::vector<double> eig;
        if (phi) {
            for (cplx lam : lams) {
                auto W = integrate_fundamental(sys, lam, g);
                Mat p = phi(lam);
                phis.push_back(p);
                eig.push_back(disk_inequality_residual(W.end(), p, sig, sys.hat));
            }
        } else {
            auto ws = weyl_samples(sys, load_pair(o.pair, r, sys), lams, r, c.n);
            phis = ws.phi;
            eig = ws.min_eig;
        }
        double me = *std::min_element(eig.begin(), eig.end());
        worst = std::min(worst, me);
        json e = {{"r", r}, {"min_eig", me}};
        if (phi) {
            int failing = 0;
            for (double v : eig)
                if (v < -tol) ++failing;
            e["failing_lambdas"] = failing;
        }
        rep["r_set"].push_back(e);
        t.rows = phis[0].rows();
        t.cols = phis[0].cols();
        for (size_t k = 0; k < lams.size(); ++k) {
            t.lead_values.push_back({lams[k].real(), lams[k].imag()});
            t.values.push_back(phis[k]);
            t.trail_values.push_back({eig[k]});
        }
        emit_csv("weyl_" + std::to_string(ri) + ".csv", t);
        pass = pass && me >= -tol;
    }
    if (!phi && rs.size() > 1) {
        for (size_t ri = 0; ri + 1 < rs.size(); ++ri) {
            double r1 = std::min(rs[ri], rs[ri + 1]), r2 = std::max(rs[ri], rs[ri + 1]);
            auto nr = nestedness_check(sys, load_pair(o.pair, r2, sys), r1, r2, lams, c.n, tol);
            rep["nestedness"].push_back({{"r1", r1}, {"r2", r2}, {"worst", nr.worst}, {"pass", nr.pass}});
            pass = pass && nr.pass;
        }
    }
    std::ostringstream cert;
    cert << "membership certified on the finite r-set {";
    for (size_t i = 0; i < rs.size(); ++i) cert << (i ? ", " : "") << rs[i];
    cert << "}";
    rep["certified"] = cert.str();
    rep["worst_min_eig"] = worst;
    rep["n"] = c.n;
    rep["tol"] = tol;
    rep["pass"] = pass;
    return rep;
}

// identities

CanonicalSystem system_for(const Common& c, const std::string& fallback, json& rep) {
    return load_system(c, fallback, rep);
}

SNode node_for(const CanonicalSystem& sys, const Grid& g, json& rep) {
    auto e = discrete_normalized_E(sys, g, 0);
    rep["similarity_residual"] = e.similarity_residual;
    rep["normalization_residual"] = e.normalization_residual;
    return snode_from_E(e.E.M, sys, g);
}

json run_identities(const Common& c, const std::string& check) {
    json rep = {{"check", check}, {"n", c.n}};
    Grid g = make_grid(c.r, c.n);
    std::string prof = c.profile;
    double residual = 0, tol = 0;
    bool extra_ok = true;
    if (check == "s4") {
        auto P = load_amplitude(prof.empty() ? "example65" : prof, rep);
        residual = residual_identity_S4(operator_Z_from_Phi1(P, g), assemble_PijPi(P, g));
        tol = tol_or(c, 1e-3);
    } else if (check == "s41") {
        auto v0 = load_amplitude(prof.empty() ? "expreal" : prof, rep);
        residual = example46_operator(v0, g).residual;
        tol = tol_or(c, 1e-3);
    } else if (check == "s10" || check == "s11") {
        auto v0 = load_amplitude(prof.empty() ? "expreal" : prof, rep);
        auto ups = example46_upsilon(v0, c.r);
        auto Zk = example46_Z_kernel(v0, c.r);
        auto S0 = example46_operator(v0, g).S0;
        if (check == "s10") {
            auto sz = build_S_from_Z(Zk, [ups](double x) { return ups.value(x); }, g);
            residual = sz.identity_residual;
            rep["s34_residual"] = sz.s34_residual;
            rep["direct_difference"] = op_norm(sz.S.M - S0.M);
        } else {
            double r = c.r;
            auto tz = build_T_from_upsilon(flipped_kernel(Zk, r),
                                           [ups, r](double x) { return Mat(ups.value(2 * r - x).conjugate()); }, g);
            residual = tz.identity_residual;
            rep["s15_residual"] = tz.s15_residual;
            rep["direct_difference"] = op_norm(tz.T.M - flip_conjugate(S0).M);
        }
        tol = tol_or(c, 1e-3);
    } else if (check == "s49") {
        auto R0 = load_amplitude(prof.empty() ? "exp" : prof, rep);
        auto rk = example47_check(R0, g);
        residual = rk.residual;
        rep["rank"] = rk.rank;
        rep["rank_lhs"] = rk.rank_lhs;
        rep["gap_ratio"] = rk.gap_ratio;
        extra_ok = rk.rank <= 2 * R0.rows();
        tol = tol_or(c, 1e-3);
    } else if (check == "s39prime") {
        auto P = load_amplitude(prof.empty() ? "example65" : prof, rep);
        residual = convolution_identity_residual(P, g);
        tol = tol_or(c, 1e-6);
    } else if (check == "f3" || check == "s52") {
        auto sys = system_for(c, "example64", rep);
        auto node = node_for(sys, g, rep);
        if (check == "f3") {
            residual = node.identity_residual;
            tol = tol_or(c, 1e-8);
        } else {
            auto H = hamiltonian_from_snode(node.Pi, node.S, g, node.b);
            for (int k = 0; k < g.n; ++k) residual = std::max(residual, (H[k] - sys.H(g.mid(k))).norm());
            tol = tol_or(c, 1e-2);
        }
    } else {
        throw DomainError("unknown check '" + check + "'");
    }
    rep["residual"] = residual;
    rep["tol"] = tol;
    rep["pass"] = residual < tol && extra_ok;
    return rep;
}

// snode

json run_snode(const Common& c, const std::string& lams_s, const std::string& ells_s) {
    json rep = {{"check", "snode-factorize"}, {"n", c.n}};
    auto sys = load_system(c, "example64", rep);
    Grid g = make_grid(c.r, c.n);
    double tol = tol_or(c, 1e-3);
    auto lams = lambda_list(lams_s, {I1, cplx(1, 1), 4.0 * I1});
    auto ells = ells_s.empty() ? std::vector<double>{c.r / 4, c.r / 2, c.r} : parse_double_list(ells_s);
    auto node = node_for(sys, g, rep);
    auto fr = factorization_residual(sys, node, ells, lams);
    CsvTable t;
    t.lead = {"ell", "re_lam", "im_lam"};
    t.name = "w";
    t.rows = t.cols = static_cast<int>(node.sig.rows());
    t.trail = {"residual"};
    for (size_t a = 0; a < ells.size(); ++a)
        for (size_t l = 0; l < lams.size(); ++l) {
            double res = fr.residual[a * lams.size() + l];
            rep["residuals"].push_back({{"ell", ells[a]}, {"lambda", cj(lams[l])}, {"residual", res}});
            t.lead_values.push_back({ells[a], lams[l].real(), lams[l].imag()});
            t.values.push_back(transfer_wA(restrict_node(node, ells[a]), 1.0 / lams[l]).w);
            t.trail_values.push_back({res});
        }
    emit_csv("snode_factorize.csv", t);
    rep["identity_residual"] = node.identity_residual;
    rep["worst"] = fr.worst;
    rep["tol"] = tol;
    rep["pass"] = fr.worst < tol;
    return rep;
}

// asymptotics

struct AsymOpts {
    std::string mode = "verify", samples, builtin, phi1, compare;
    double theta = M_PI / 4, zmin = 2, zmax = 200, reg = -1, kappa = 4;
    int count = 0;
    bool no_tail = false;
};

std::function<Mat(cplx)> weyl_for(const std::string& name, double r, bool& hat) {
    hat = name.rfind("example64", 0) == 0;
    if (name == "example64-finite")
        return [r](cplx lam) {
            auto c = closed_form_example64({r}, lam);
            return mobius(c.Winv, Mat::Identity(1, 1), Mat::Identity(1, 1), true);
        };
    return builtin_weyl(name);
}

RaySamples get_samples(const Common& c, const AsymOpts& o, int count, json& rep) {
    if (!o.samples.empty()) {
        std::ifstream f(o.samples);
        if (!f) throw FormatError("cannot open samples file '" + o.samples + "'");
        rep["inputs"]["samples"] = o.samples;
        return read_samples_csv(f, c.r, c.hat);
    }
    std::string name = o.builtin.empty() ? "example65" : o.builtin;
    rep["inputs"]["builtin"] = name;
    bool hat = false;
    auto phi = weyl_for(name, c.r, hat);
    return sample_ray(phi, c.r, hat, ray_points(o.theta, o.zmin, o.zmax, count), o.theta);
}

std::vector<Mat> phi1_nodes(const Common& c, const AsymOpts& o, const Grid& g, json& rep) {
    std::string nm = o.phi1;
    if (nm.empty()) {
        std::string b = o.builtin.empty() ? "example65" : o.builtin;
        if (!o.samples.empty()) throw DomainError("asymptotics verify: --phi1 is required with --samples");
        nm = b.rfind("example64", 0) == 0 ? "example64" : b;
    }
    if (nm == "example23") {
        rep["inputs"]["phi1"] = "example23 (discrete E)";
        auto e = discrete_normalized_E(builtin_system("example23", c.r), g, 0);
        return e.Phi1_nodes;
    }
    return sample_nodes(load_amplitude(nm, rep), g);
}

json run_asymptotics(const Common& c, const AsymOpts& o) {
    json rep = {{"check", "asymptotics-" + o.mode}};
    if (o.mode == "verify") {
        int n = c.n > 0 ? c.n : 1024;
        Grid g = make_grid(c.r, n);
        auto s = get_samples(c, o, o.count > 0 ? o.count : 40, rep);
        auto nodes = phi1_nodes(c, o, g, rep);
        auto a = verify_asymptotics(s, nodes, g.h());
        rep["n"] = n;
        rep["resolved"] = a.n_resolved;
        rep["samples"] = static_cast<int>(a.z.size());
        rep["envelope_constant"] = a.envelope_constant;
        rep["inner_max"] = a.inner_max;
        rep["outer_max"] = a.outer_max;
        rep["bounded"] = a.bounded;
        rep["decreasing"] = a.decreasing;
        rep["note"] = a.note;
        rep["envelope_constant_note"] = "estimated empirically from the resolved samples";
        rep["pass"] = a.pass;
        CsvTable t;
        t.lead = {"re_z", "im_z"};
        t.name = "phi";
        t.rows = s.phi[0].rows();
        t.cols = s.phi[0].cols();
        t.trail = {"rho", "envelope", "floor", "resolved"};
        for (size_t k = 0; k < a.z.size(); ++k) {
            t.lead_values.push_back({a.z[k].real(), a.z[k].imag()});
            t.values.push_back(s.phi[k]);
            t.trail_values.push_back({a.rho[k], a.envelope[k], a.floor[k], a.resolved[k] ? 1.0 : 0.0});
        }
        emit_csv("asymptotics_verify.csv", t);
        return rep;
    }
    if (o.mode == "extract") {
        int n = c.n > 0 ? c.n : 64;
        ExtractOptions opt;
        opt.kappa = o.kappa;
        opt.tail = !o.no_tail;
        opt.reg = o.reg;
        auto s = get_samples(c, o, o.count > 0 ? o.count : extraction_sample_count(n, o.kappa), rep);
        auto est = extract_phi1(s, n, opt);
        rep["n"] = n;
        rep["samples"] = est.samples;
        rep["window"] = est.window;
        rep["reg"] = est.reg;
        rep["misfit"] = est.misfit;
        rep["fit_residual"] = est.fit_residual;
        rep["condition"] = est.condition;
        if (est.s39_residual >= 0) rep["s39_residual"] = est.s39_residual;
        bool pass = true;
        if (!o.compare.empty()) {
            auto ref = load_amplitude(o.compare, rep);
            double tol = tol_or(c, 1e-2);
            double l2 = est.l2_error([&](double t) { return ref.value(t); });
            rep["compare"] = {{"profile", o.compare}, {"l2_error", l2}, {"tol", tol}};
            pass = l2 < tol;
        }
        rep["pass"] = pass;
        CsvTable t;
        t.lead = {"t"};
        t.name = "phi1";
        t.rows = est.values[0].rows();
        t.cols = est.values[0].cols();
        for (int j = 0; j <= n; ++j) {
            t.lead_values.push_back({est.grid.node(j)});
            t.values.push_back(est.values[j]);
        }
        emit_csv("phi1_estimate.csv", t);
        return rep;
    }
    if (o.mode == "sample") {
        auto s = get_samples(c, o, o.count > 0 ? o.count : 40, rep);
        std::ostringstream os;
        write_samples_csv(os, s);
        write_atomic("samples.csv", os.str());
        rep["samples"] = static_cast<int>(s.z.size());
        rep["pass"] = true;
        return rep;
    }
    throw DomainError("asymptotics: mode must be verify, extract or sample");
}

// transform

SeriesData load_series(const std::string& spec, double r) {
    if (!fs::exists(spec)) return builtin_series(spec.empty() ? "unit" : spec, r);
    auto cfg = parse_config_file(spec);
    fs::path base = fs::path(spec).parent_path();
    auto prof = [&](const std::string& key) {
        if (!cfg.count(key)) throw FormatError("series data file needs '" + key + "'");
        fs::path p = cfg.at(key);
        if (p.is_relative()) p = base / p;
        return read_profile_file(p.string()).profile;
    };
    double rr = cfg.count("r") ? parse_double_list(cfg.at("r")).at(0) : r;
    return SeriesData(prof("u4"), prof("h1"), prof("h2"), rr, spec);
}

json run_series(const Common& c, const std::string& data, int kmax, int table_n) {
    json rep = {{"check", "transform-series"}};
    auto d = load_series(data, c.r);
    rep["inputs"]["data"] = d.name;
    rep["kmax"] = kmax;
    auto s = series_sum(d, kmax, table_n);
    rep["C"] = s.C;
    rep["max_norm"] = s.max_norm;
    rep["bound_ratio"] = s.bound_ratio;
    rep["hermitian_defect"] = d.hermitian_defect();
    rep["pass"] = s.bound_holds;
    CsvTable t;
    t.lead = {"x", "zeta"};
    t.name = "V";
    t.rows = t.cols = d.b();
    const auto& T = s.terms[0];
    for (double x : T.x_nodes())
        for (double sv : T.s_nodes()) {
            t.lead_values.push_back({x, sv * x});
            t.values.push_back(s.sum(x, sv * x));
        }
    emit_csv("series.csv", t);
    return rep;
}

json run_solve_e(const Common& c, int global_max) {
    json rep = {{"check", "transform-solve-e"}, {"n", c.n}};
    auto sys = load_system(c, "example65", rep);
    Grid g = make_grid(c.r, c.n);
    double tol = tol_or(c, 1e-8);
    auto e = discrete_normalized_E(sys, g, global_max);
    rep["similarity_residual"] = e.similarity_residual;
    rep["normalization_residual"] = e.normalization_residual;
    rep["u0"] = mj(e.u0);
    if (e.qr_difference >= 0) {
        rep["nullity"] = e.nullity;
        rep["qr_difference"] = e.qr_difference;
    }
    rep["s39_residual"] = convolution_identity_residual(e.phi1_profile(), g);
    rep["tol"] = tol;
    rep["pass"] = e.similarity_residual < tol && e.normalization_residual < tol && e.nullity == 0;
    CsvTable t;
    t.lead = {"t"};
    t.name = "phi1";
    t.rows = e.Phi1_nodes[0].rows();
    t.cols = e.Phi1_nodes[0].cols();
    for (int j = 0; j <= g.n; ++j) {
        t.lead_values.push_back({g.node(j)});
        t.values.push_back(e.Phi1_nodes[j]);
    }
    emit_csv("phi1_solve_e.csv", t);
    return rep;
}

// demo

json bundle(const std::string& name, std::vector<json> checks) {
    bool pass = true;
    for (auto& c : checks) pass = pass && c.at("pass").get<bool>();
    return {{"check", "demo-" + name}, {"checks", checks}, {"pass", pass}};
}

json run_demo(const std::string& name) {
    std::vector<json> checks;
    const int n = 256;
    Grid g(1.0, n);
    Common c;
    c.n = n;
    c.profile = name;
    checks.push_back(run_validate(c));
    if (name == "example23") {
        checks.push_back(run_fundamental(c, "i"));
        Common w = c;
        w.n = 1024;
        checks.push_back(run_weyl(w, {"", "", "0.5,1,2", "zeta1"}));
        json imp = run_weyl(w, {"", "", "0.5,1,2", "zeta2"});
        int failing = 0;
        for (auto& e : imp["r_set"]) failing += e["failing_lambdas"].get<int>();
        int total = static_cast<int>(default_lambda_grid().size()) * 3;
        checks.push_back({{"check", "zeta2 impostor rejected"}, {"failing", failing}, {"total", total},
                          {"pass", failing == total}});
        auto sys = builtin_system("example23", 1.0);
        auto e = discrete_normalized_E(sys, g, 0);
        checks.push_back(residual_check("s39prime of discrete-E Phi1", convolution_identity_residual(e.phi1_profile(), g), 1e-3));
        auto s = sample_ray(builtin_weyl("example23"), 1.0, false, ray_points(M_PI / 4, 2, 200, 40));
        auto a = verify_asymptotics(s, e.Phi1_nodes, g.h());
        checks.push_back({{"check", "asymptotics zeta1"}, {"note", a.note}, {"pass", a.pass}});
        auto sx = sample_ray(builtin_weyl("example23"), 1.0, false, ray_points(M_PI / 4, 2, 200, extraction_sample_count(64)));
        auto est = extract_phi1(sx, 64);
        auto ep = e.phi1_profile();
        checks.push_back(residual_check("extracted vs discrete-E Phi1 (L2)", est.l2_error([&](double t) { return ep.value(t); }), 5e-2));
    } else if (name == "example64") {
        checks.push_back(run_fundamental(c, "i,1+i"));
        auto sys = builtin_system("example64", 1.0);
        auto e = discrete_normalized_E(sys, g, 0);
        checks.push_back(residual_check("E = I", op_norm(e.E.M - Mat::Identity(n, n)), 1e-6));
        checks.push_back(run_snode(c, "", ""));
        Common a = c;
        a.n = 0;
        AsymOpts o;
        o.builtin = "example64-finite";
        checks.push_back(run_asymptotics(a, o));
        cplx z = std::polar(100.0, M_PI / 4);
        bool hat;
        auto phihat = weyl_for("example64-finite", 1.0, hat);
        double rel = std::abs(phihat(z * z)(0, 0) - I1 / z) / std::abs(I1 / z);
        checks.push_back(residual_check("phihat ~ i/z at |z| = 100", rel, 1e-3));
        AsymOpts x;
        x.mode = "extract";
        x.builtin = "example64";
        x.compare = "example64";
        checks.push_back(run_asymptotics(a, x));
    } else if (name == "example65") {
        auto sys = builtin_system("example65", 1.0);
        auto e = discrete_normalized_E(sys, g, 0);
        auto ref = amplitude_profile("example65");
        double derr = 0;
        for (int j = 0; j <= n; ++j) derr = std::max(derr, (e.Phi1_nodes[j] - ref.value(g.node(j))).norm());
        checks.push_back(residual_check("discrete-E Phi1 vs 2e^{it}-1 (max)", derr, 1e-2));
        Common i = c;
        i.profile = "";
        checks.push_back(run_identities(i, "s39prime"));
        Common z = c;
        checks.push_back(run_snode(z, "", ""));
        AsymOpts o;
        o.builtin = "example65";
        Common a = c;
        a.n = 0;
        checks.push_back(run_asymptotics(a, o));
        auto s = sample_ray(builtin_weyl("example65"), 1.0, false, ray_points(M_PI / 4, 2, 200, extraction_sample_count(64)));
        auto est = extract_phi1(s, 64);
        checks.push_back(residual_check("extracted Phi1 vs 2e^{it}-1 (L2)", est.l2_error([&](double t) { return ref.value(t); }), 1e-2));
        auto ep = e.phi1_profile();
        checks.push_back(residual_check("extraction vs discrete E (L2)", est.l2_error([&](double t) { return ep.value(t); }), 5e-2));
    } else {
        throw DomainError("demo: unknown example '" + name + "'");
    }
    return bundle(name, std::move(checks));
}

CLI::App* leaf_of(CLI::App* a) {
    for (auto* s : a->get_subcommands())
        if (s->parsed()) return leaf_of(s);
    return a;
}

void apply_config(CLI::App* leaf, const std::map<std::string, std::string>& cfg) {
    for (auto& [k, v] : cfg) {
        CLI::Option* o = nullptr;
        for (CLI::App* a = leaf; a && !o; a = a->get_parent()) {
            o = a->get_option_no_throw("--" + k);
            if (!o) o = a->get_option_no_throw(k);
        }
        if (!o) throw FormatError("config: unknown key '" + k + "'");
        if (o->count() > 0) continue;
        o->add_result(v);
        o->run_callback();
    }
}

void print_report(const json& rep, int depth = 0) {
    std::string pad(depth * 2, ' ');
    std::cout << pad << (rep.value("pass", false) ? "PASS " : "FAIL ") << rep.value("check", std::string("?"));
    for (const char* k : {"residual", "worst", "note"})
        if (rep.contains(k)) std::cout << "  " << k << "=" << rep[k].dump();
    std::cout << "\n";
    if (rep.contains("checks"))
        for (auto& c : rep["checks"]) print_report(c, depth + 1);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Canonical-system toolkit: Weyl functions, operator identities, amplitudes"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.add_flag("--json", out.json, "print and write JSON reports");
    app.add_flag("--csv", out.csv, "write CSV outputs");
    app.add_flag("--timing", out.timing, "include wall time in reports");
    app.add_option("--seed", out.seed, "seed recorded in reports")->capture_default_str();
    app.add_option("--out", out.dir, "output directory (default $CANSYS_OUT or .)");
    app.add_option("--config", out.config, "key = value file; command-line flags win");

    Common vb, fu, we, id, sn, as, tr;
    auto* s_vb = app.add_subcommand("validate-beta", "check the constraints on beta");
    add_common(s_vb, vb, 256);
    std::string vb_export;
    s_vb->add_option("--export", vb_export, "write beta as Profile-CSV into the output directory");

    std::string fu_lams;
    auto* s_fu = app.add_subcommand("fundamental", "integrate W(x, lam) and compare with closed forms");
    add_common(s_fu, fu, 256);
    s_fu->add_option("--lambdas", fu_lams, "comma-separated lambda list");

    WeylOpts wo;
    auto* s_we = app.add_subcommand("weyl", "Weyl-function samples and disk membership");
    add_common(s_we, we, 1024);
    s_we->add_option("--pair", wo.pair, "pair JSON file or example23_pair");
    s_we->add_option("--lambdas", wo.lams, "lambda list (default grid)");
    s_we->add_option("--r-set", wo.rset, "comma-separated r values");
    s_we->add_option("--phi", wo.phi, "closed-form candidate: zeta1 or zeta2");

    std::string check;
    auto* s_id = app.add_subcommand("identities", "operator identity residuals");
    add_common(s_id, id, 128);
    s_id->add_option("--check", check, "s4|s10|s11|f3|s41|s49|s39prime|s52")
        ->required()
        ->check(CLI::IsMember({"s4", "s10", "s11", "f3", "s41", "s49", "s39prime", "s52"}));

    std::string sn_lams, sn_ells;
    auto* s_sn = app.add_subcommand("snode", "S-node factorization");
    auto* s_fa = s_sn->add_subcommand("factorize", "compare W(l, lam) with w_A(l, 1/lam)");
    s_sn->require_subcommand(1);
    add_common(s_fa, sn, 256);
    s_fa->add_option("--lambdas", sn_lams, "lambda list");
    s_fa->add_option("--ells", sn_ells, "restriction points (grid nodes)");

    AsymOpts ao;
    auto* s_as = app.add_subcommand("asymptotics", "verify the high-energy asymptotics or extract Phi1");
    add_common(s_as, as, 0);
    s_as->add_option("mode", ao.mode, "verify | extract | sample")->check(CLI::IsMember({"verify", "extract", "sample"}));
    s_as->add_option("--samples", ao.samples, "samples CSV");
    s_as->add_option("--builtin", ao.builtin, "example65 | example64 | example64-finite | example23");
    s_as->add_option("--phi1", ao.phi1, "amplitude for verify (name or Profile-CSV)");
    s_as->add_option("--compare", ao.compare, "reference amplitude for extract");
    s_as->add_option("--ray", ao.theta, "arg z of the sample ray")->capture_default_str();
    s_as->add_option("--zmin", ao.zmin)->capture_default_str();
    s_as->add_option("--zmax", ao.zmax)->capture_default_str();
    s_as->add_option("--count", ao.count, "number of generated samples");
    s_as->add_option("--reg", ao.reg, "Tikhonov weight (default scaled)");
    s_as->add_option("--kappa", ao.kappa, "fit window in units of r")->capture_default_str();
    s_as->add_flag("--no-tail", ao.no_tail, "no continuation beyond the window");

    std::string data;
    int kmax = 4, table_n = 12, gmax = 0;
    auto* s_tr = app.add_subcommand("transform", "similarity series and discrete transformation operator");
    s_tr->require_subcommand(1);
    auto* s_se = s_tr->add_subcommand("series", "V_k series and its bound");
    add_common(s_se, tr, 256);
    s_se->add_option("--data", data, "unit | zero | h-only | mixed, or a key = value file with u4, h1, h2, r");
    s_se->add_option("--kmax", kmax)->capture_default_str();
    s_se->add_option("--table-n", table_n)->capture_default_str();
    auto* s_se2 = s_tr->add_subcommand("solve-e", "normalized transformation operator and Phi1");
    add_common(s_se2, tr, 256);
    s_se2->add_option("--global-check-max", gmax, "also solve the global system by QR up to this n")->capture_default_str();

    std::string demo;
    auto* s_de = app.add_subcommand("demo", "end-to-end bundle");
    s_de->add_option("name", demo, "example23 | example64 | example65")
        ->required()
        ->check(CLI::IsMember({"example23", "example64", "example65"}));

    try {
        app.parse(argc, argv);
        if (!out.config.empty()) apply_config(leaf_of(&app), parse_config_file(out.config));
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    auto t0 = std::chrono::steady_clock::now();
    json rep;
    std::string tag;
    try {
        if (s_vb->parsed()) rep = run_validate(vb, vb_export), tag = "validate-beta";
        else if (s_fu->parsed()) rep = run_fundamental(fu, fu_lams), tag = "fundamental";
        else if (s_we->parsed()) rep = run_weyl(we, wo), tag = "weyl";
        else if (s_id->parsed()) rep = run_identities(id, check), tag = "identities_" + check;
        else if (s_fa->parsed()) rep = run_snode(sn, sn_lams, sn_ells), tag = "snode_factorize";
        else if (s_as->parsed()) rep = run_asymptotics(as, ao), tag = "asymptotics_" + ao.mode;
        else if (s_se->parsed()) rep = run_series(tr, data, kmax, table_n), tag = "transform_series";
        else if (s_se2->parsed()) rep = run_solve_e(tr, gmax), tag = "transform_solve_e";
        else if (s_de->parsed()) rep = run_demo(demo), tag = "demo_" + demo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    rep["seed"] = out.seed;
    rep["version"] = kVersion;
    if (out.timing)
        rep["timing_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (out.json) {
        std::cout << rep.dump(2) << "\n";
        write_atomic(tag + ".json", rep.dump(2) + "\n");
    } else {
        print_report(rep);
    }
    return rep.value("pass", false) ? 0 : 1;
}
