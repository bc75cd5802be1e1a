#include "cansys/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cansys {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n"), b = s.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

double to_double(const std::string& s, const std::string& where) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw FormatError(where + ": cannot parse number '" + s + "'");
    }
}

std::string entry_headers(const std::string& name, int rows, int cols) {
    std::string h;
    for (int i = 0; i < rows; ++i)
        for (int k = 0; k < cols; ++k) {
            std::string tag = name + "_" + std::to_string(i) + "_" + std::to_string(k);
            h += ",re_" + tag + ",im_" + tag;
        }
    return h;
}

std::string entry_values(const Mat& m) {
    std::string s;
    for (int i = 0; i < m.rows(); ++i)
        for (int k = 0; k < m.cols(); ++k) s += "," + fmt17(m(i, k).real()) + "," + fmt17(m(i, k).imag());
    return s;
}

// Parses `re_<name>_<i>_<k>` / `im_...`; returns false for other names.
bool parse_entry(const std::string& col, bool& re, std::string& name, int& i, int& k) {
    if (col.size() < 4 || (col.rfind("re_", 0) != 0 && col.rfind("im_", 0) != 0)) return false;
    re = col[0] == 'r';
    auto p2 = col.rfind('_');
    if (p2 == std::string::npos || p2 < 4) return false;
    auto p1 = col.rfind('_', p2 - 1);
    if (p1 == std::string::npos || p1 < 3) return false;
    try {
        i = std::stoi(col.substr(p1 + 1, p2 - p1 - 1));
        k = std::stoi(col.substr(p2 + 1));
    } catch (const std::exception&) {
        return false;
    }
    name = col.substr(3, p1 - 3);
    return true;
}

struct EntryLayout {
    int rows = 0, cols = 0;
    std::vector<int> first; // column index of each re part, row-major
};

EntryLayout layout_from(const std::vector<std::string>& cols, size_t begin, size_t end, const std::string& where) {
    EntryLayout L;
    std::map<std::pair<int, int>, int> re_at, im_at;
    for (size_t c = begin; c < end; ++c) {
        bool re;
        std::string nm;
        int i, k;
        if (!parse_entry(cols[c], re, nm, i, k)) throw FormatError(where + ": unexpected column '" + cols[c] + "'");
        (re ? re_at : im_at)[{i, k}] = static_cast<int>(c);
        L.rows = std::max(L.rows, i + 1);
        L.cols = std::max(L.cols, k + 1);
    }
    if (static_cast<int>(re_at.size()) != L.rows * L.cols || re_at.size() != im_at.size())
        throw FormatError(where + ": entry columns do not form a full matrix");
    for (int i = 0; i < L.rows; ++i)
        for (int k = 0; k < L.cols; ++k) {
            int a = re_at.at({i, k}), b = im_at.at({i, k});
            if (b != a + 1) throw FormatError(where + ": im column must follow its re column");
            L.first.push_back(a);
        }
    return L;
}

Mat read_entries(const std::vector<double>& v, const EntryLayout& L) {
    Mat m(L.rows, L.cols);
    for (int i = 0; i < L.rows; ++i)
        for (int k = 0; k < L.cols; ++k) {
            int c = L.first[i * L.cols + k];
            m(i, k) = cplx(v[c], v[c + 1]);
        }
    return m;
}

} // namespace

void write_profile_csv(std::ostream& os, const MatrixProfile& f, const Grid& g, const std::string& prefix) {
    os << "x" << entry_headers(prefix, f.rows(), f.cols()) << "\n";
    auto block = [&](auto get) {
        for (double x : g.nodes()) os << fmt17(x) << entry_values(get(x)) << "\n";
    };
    block([&](double x) { return f.value(x); });
    if (!f.has_d1()) throw DomainError("write_profile_csv: profile has no derivative data");
    os << "#d1\n";
    block([&](double x) { return f.d1(x); });
    if (f.has_d2()) {
        os << "#d2\n";
        block([&](double x) { return f.d2(x); });
    }
}

LoadedProfile read_profile_csv(std::istream& is, const std::string& source, double warn_tol) {
    std::string line;
    std::vector<std::string> header;
    EntryLayout L;
    int block = 0;
    std::vector<double> xs[3];
    std::vector<Mat> vals[3];
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty()) continue;
        std::string where = source + ":" + std::to_string(lineno);
        if (line[0] == '#') {
            if (line == "#d1")
                block = 1;
            else if (line == "#d2")
                block = 2;
            else
                continue;
            if (header.empty()) throw FormatError(where + ": block separator before the header");
            continue;
        }
        auto cols = split(line);
        if (cols[0] == "x") {
            if (header.empty()) {
                header = cols;
                L = layout_from(cols, 1, cols.size(), where);
            } else if (cols != header) {
                throw FormatError(where + ": repeated header differs from the first one");
            }
            continue;
        }
        if (header.empty()) throw FormatError(where + ": data before the header");
        if (cols.size() != header.size())
            throw FormatError(where + ": expected " + std::to_string(header.size()) + " columns, got " +
                              std::to_string(cols.size()));
        std::vector<double> v;
        for (auto& c : cols) v.push_back(to_double(c, where));
        xs[block].push_back(v[0]);
        vals[block].push_back(read_entries(v, L));
    }
    if (header.empty()) throw FormatError(source + ": empty profile file");
    if (xs[0].size() < 2) throw FormatError(source + ": need at least two sample rows");
    if (std::abs(xs[0][0]) > 1e-12) throw FormatError(source + ": x column must start at 0");
    for (size_t i = 1; i < xs[0].size(); ++i)
        if (!(xs[0][i] > xs[0][i - 1])) throw FormatError(source + ": x column must be strictly increasing");
    if (xs[1].empty()) throw FormatError(source + ": missing #d1 block");
    for (int b = 1; b <= 2; ++b) {
        if (xs[b].empty()) continue;
        if (xs[b].size() != xs[0].size()) throw FormatError(source + ": derivative block has a different length");
        for (size_t i = 0; i < xs[0].size(); ++i)
            if (std::abs(xs[b][i] - xs[0][i]) > 1e-12 * std::max(1.0, std::abs(xs[0][i])))
                throw FormatError(source + ": derivative block x column differs from the value block");
    }
    LoadedProfile out;
    out.profile = MatrixProfile::sampled(xs[0], vals[0], vals[1], vals[2], source);
    Grid g(xs[0].back(), static_cast<int>(xs[0].size()) - 1);
    out.consistency = check_consistency(out.profile, g);
    if (out.consistency.value_defect > warn_tol) {
        std::ostringstream os;
        os << source << ": value/d1 consistency defect " << out.consistency.value_defect << " exceeds " << warn_tol;
        out.warnings.push_back(os.str());
    }
    if (out.consistency.has_d2 && out.consistency.d1_defect > warn_tol) {
        std::ostringstream os;
        os << source << ": d1/d2 consistency defect " << out.consistency.d1_defect << " exceeds " << warn_tol;
        out.warnings.push_back(os.str());
    }
    return out;
}

LoadedProfile read_profile_file(const std::string& path, double warn_tol) {
    std::ifstream f(path);
    if (!f) throw FormatError("cannot open profile file '" + path + "'");
    return read_profile_csv(f, path, warn_tol);
}

void write_series_csv(std::ostream& os, const CsvTable& t) {
    bool first = true;
    for (auto& c : t.lead) {
        os << (first ? "" : ",") << c;
        first = false;
    }
    std::string eh = entry_headers(t.name, t.rows, t.cols);
    os << (first ? eh.substr(1) : eh);
    for (auto& c : t.trail) os << "," << c;
    os << "\n";
    for (size_t r = 0; r < t.values.size(); ++r) {
        std::string line;
        for (double v : t.lead_values[r]) line += "," + fmt17(v);
        line += entry_values(t.values[r]);
        if (r < t.trail_values.size())
            for (double v : t.trail_values[r]) line += "," + fmt17(v);
        os << line.substr(1) << "\n";
    }
}

CsvTable read_series_csv(std::istream& is, const std::string& name, int n_lead) {
    std::string line;
    CsvTable t;
    t.name = name;
    std::vector<std::string> header;
    EntryLayout L;
    size_t entry_end = 0;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto cols = split(line);
        std::string where = "line " + std::to_string(lineno);
        if (header.empty()) {
            header = cols;
            if (static_cast<int>(cols.size()) < n_lead) throw FormatError(where + ": too few columns in header");
            t.lead.assign(cols.begin(), cols.begin() + n_lead);
            entry_end = n_lead;
            while (entry_end < cols.size()) {
                bool re;
                std::string nm;
                int i, k;
                if (!parse_entry(cols[entry_end], re, nm, i, k) || nm != name) break;
                ++entry_end;
            }
            L = layout_from(cols, n_lead, entry_end, where);
            t.rows = L.rows;
            t.cols = L.cols;
            t.trail.assign(cols.begin() + entry_end, cols.end());
            continue;
        }
        if (cols.size() != header.size()) throw FormatError(where + ": column count differs from header");
        std::vector<double> v;
        for (auto& c : cols) v.push_back(to_double(c, where));
        t.lead_values.emplace_back(v.begin(), v.begin() + n_lead);
        t.values.push_back(read_entries(v, L));
        t.trail_values.emplace_back(v.begin() + entry_end, v.end());
    }
    if (header.empty()) throw FormatError("empty CSV input");
    return t;
}

void write_samples_csv(std::ostream& os, const RaySamples& s) {
    CsvTable t;
    t.lead = {"re_z", "im_z"};
    t.name = "phi";
    t.rows = s.phi.empty() ? 1 : s.phi[0].rows();
    t.cols = s.phi.empty() ? 1 : s.phi[0].cols();
    for (size_t k = 0; k < s.z.size(); ++k) {
        t.lead_values.push_back({s.z[k].real(), s.z[k].imag()});
        t.values.push_back(s.phi[k]);
    }
    write_series_csv(os, t);
}

RaySamples read_samples_csv(std::istream& is, double r, bool hat) {
    CsvTable t = read_series_csv(is, "phi", 2);
    if (t.lead != std::vector<std::string>{"re_z", "im_z"}) throw FormatError("samples CSV must start with re_z,im_z");
    RaySamples s;
    s.r = r;
    s.hat = hat;
    for (size_t k = 0; k < t.values.size(); ++k) {
        cplx z(t.lead_values[k][0], t.lead_values[k][1]);
        if (!(z.real() > 0 && z.imag() > 0)) throw FormatError("samples CSV: z must lie in the open first quadrant");
        s.z.push_back(z);
        s.phi.push_back(t.values[k]);
    }
    if (!s.z.empty()) s.theta = std::arg(s.z.front());
    return s;
}

std::map<std::string, std::string> parse_config(std::istream& is) {
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
        if (k.empty()) throw FormatError("config line " + std::to_string(lineno) + ": empty key");
        out[k] = v;
    }
    return out;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw FormatError("cannot open config file '" + path + "'");
    return parse_config(f);
}

namespace {
Mat json_matrix(const nlohmann::json& j, const std::string& what) {
    if (!j.is_object() || !j.contains("re")) throw FormatError("pair JSON: " + what + " needs a \"re\" array");
    auto re = j.at("re");
    nlohmann::json im = j.contains("im") ? j.at("im") : nlohmann::json();
    int rows = static_cast<int>(re.size());
    if (rows == 0) throw FormatError("pair JSON: " + what + " is empty");
    int cols = static_cast<int>(re[0].size());
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(re[i].size()) != cols) throw FormatError("pair JSON: ragged rows in " + what);
        for (int k = 0; k < cols; ++k)
            m(i, k) = cplx(re[i][k].get<double>(), im.is_null() ? 0.0 : im[i][k].get<double>());
    }
    return m;
}
} // namespace

PropertyJPair parse_pair_json(const std::string& text, double r) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw FormatError(std::string("pair JSON: ") + e.what());
    }
    if (j.contains("builtin")) {
        std::string b = j.at("builtin").get<std::string>();
        if (b != "example23_pair") throw FormatError("pair JSON: unknown builtin rule '" + b + "'");
        int p = j.value("p", 1);
        double phase = j.value("alpha_phase", 0.0), c = j.value("c", 0.5);
        Mat alpha = std::exp(I1 * phase) * Mat::Identity(p, p);
        return example23_pair(r, alpha, c);
    }
    if (!j.contains("P1") || !j.contains("P2")) throw FormatError("pair JSON: need P1 and P2 or a builtin rule");
    Mat P1 = json_matrix(j.at("P1"), "P1"), P2 = json_matrix(j.at("P2"), "P2");
    if (P1.cols() != P2.cols()) throw FormatError("pair JSON: P1 and P2 must have the same column count");
    return constant_pair(P1, P2);
}

cplx parse_complex(const std::string& raw) {
    std::string s;
    for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw FormatError("empty complex number");
    auto num = [&](const std::string& t) { return to_double(t, "complex '" + raw + "'"); };
    if (s.back() != 'i' && s.back() != 'j') return num(s);
    std::string body = s.substr(0, s.size() - 1);
    size_t split_at = std::string::npos;
    for (size_t p = body.size(); p-- > 1;)
        if ((body[p] == '+' || body[p] == '-') && body[p - 1] != 'e' && body[p - 1] != 'E') {
            split_at = p;
            break;
        }
    std::string re_s = split_at == std::string::npos ? "" : body.substr(0, split_at);
    std::string im_s = split_at == std::string::npos ? body : body.substr(split_at);
    double im = (im_s.empty() || im_s == "+") ? 1.0 : (im_s == "-" ? -1.0 : num(im_s));
    return {re_s.empty() ? 0.0 : num(re_s), im};
}

std::vector<cplx> parse_complex_list(const std::string& s) {
    std::vector<cplx> out;
    for (auto& t : split(s, ','))
        if (!t.empty()) out.push_back(parse_complex(t));
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    for (auto& t : split(s, ','))
        if (!t.empty()) out.push_back(to_double(t, "list '" + s + "'"));
    return out;
}

} // namespace cansys
