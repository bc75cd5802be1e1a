#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "cansys/asymptotics.hpp"
#include "cansys/weyl.hpp"

namespace cansys {

// Profile-CSV: header `x,re_<p>_<i>_<k>,im_<p>_<i>_<k>,...` (row-major), a
// value block, then `#d1` and its block, then optionally `#d2` and its block.
void write_profile_csv(std::ostream& os, const MatrixProfile& f, const Grid& g, const std::string& prefix = "b");

struct LoadedProfile {
    MatrixProfile profile;
    ConsistencyReport consistency;
    std::vector<std::string> warnings;
};
LoadedProfile read_profile_csv(std::istream& is, const std::string& source = "<stream>", double warn_tol = 1e-6);
LoadedProfile read_profile_file(const std::string& path, double warn_tol = 1e-6);

// CSV of matrix series: leading scalar columns, then re/im columns of each
// matrix entry named <name>_<i>_<k>, then trailing scalar columns.
struct CsvTable {
    std::vector<std::string> lead, trail;
    std::string name;
    int rows = 1, cols = 1;
    std::vector<std::vector<double>> lead_values, trail_values;
    std::vector<Mat> values;
};
void write_series_csv(std::ostream& os, const CsvTable& t);
CsvTable read_series_csv(std::istream& is, const std::string& name, int n_lead);

// Ray samples: `re_z,im_z,re_phi_i_k,im_phi_i_k,...`.
void write_samples_csv(std::ostream& os, const RaySamples& s);
RaySamples read_samples_csv(std::istream& is, double r, bool hat);

// `key = value` lines; `#` starts a comment.
std::map<std::string, std::string> parse_config(std::istream& is);
std::map<std::string, std::string> parse_config_file(const std::string& path);

// {"P1": {"re": [[...]], "im": [[...]]}, "P2": ...} or
// {"builtin": "example23_pair", "alpha_phase": 0, "c": 0.5, "p": 1}.
PropertyJPair parse_pair_json(const std::string& text, double r);

// Comma-separated complex list: "i", "1+i", "4i", "2.5-0.1i", "3".
std::vector<cplx> parse_complex_list(const std::string& s);
cplx parse_complex(const std::string& s);
std::vector<double> parse_double_list(const std::string& s);

std::string fmt17(double v);

} // namespace cansys
