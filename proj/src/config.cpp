/*
 * Copyright 2026 The sgstab authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "sgstab/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace sgstab {

namespace {

std::string trim(const std::string& s)
{
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// section -> (key -> value), with every key consumption tracked so unknown
// keys can be rejected at the end
class KvTree {
public:
    void insert(const std::string& section, const std::string& key, const std::string& value, int line)
    {
        auto& sec = data_[section];
        if (sec.count(key)) {
            throw std::invalid_argument("config line " + std::to_string(line) + ": duplicate key '" +
                                        key + "' in [" + section + "]");
        }
        sec[key] = value;
    }

    bool has_section(const std::string& section) const { return data_.count(section) > 0; }

    std::optional<std::string> take(const std::string& section, const std::string& key)
    {
        auto si = data_.find(section);
        if (si == data_.end()) return std::nullopt;
        auto ki = si->second.find(key);
        if (ki == si->second.end()) return std::nullopt;
        consumed_.insert(section + "." + key);
        return ki->second;
    }

    void reject_unconsumed(const std::set<std::string>& known_sections) const
    {
        for (const auto& [section, keys] : data_) {
            if (!known_sections.count(section)) {
                throw std::invalid_argument("config: unknown section [" + section + "]");
            }
            for (const auto& [key, value] : keys) {
                if (!consumed_.count(section + "." + key)) {
                    throw std::invalid_argument("config: unknown key '" + key + "' in [" + section + "]");
                }
            }
        }
    }

private:
    std::map<std::string, std::map<std::string, std::string>> data_;
    std::set<std::string> consumed_;
};

KvTree tokenize(const std::string& text)
{
    KvTree tree;
    std::istringstream is(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) {
                throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty section name");
            }
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected 'key = value'");
        }
        if (section.empty()) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": key outside of a [section]");
        }
        tree.insert(section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no);
    }
    return tree;
}

double parse_number(const std::string& v, const std::string& where)
{
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: " + where + " is not a number ('" + v + "')");
    }
    if (pos != v.size()) {
        throw std::invalid_argument("config: trailing characters after number in " + where);
    }
    return x;
}

int parse_int(const std::string& v, const std::string& where)
{
    const double x = parse_number(v, where);
    if (x != std::floor(x)) throw std::invalid_argument("config: " + where + " must be an integer");
    return static_cast<int>(x);
}

bool parse_bool(const std::string& v, const std::string& where)
{
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw std::invalid_argument("config: " + where + " must be a boolean (true/false)");
}

Eigen::VectorXd parse_list(const std::string& v, const std::string& where)
{
    std::vector<double> vals;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) {
            throw std::invalid_argument("config: empty entry in list " + where);
        }
        vals.push_back(parse_number(item, where));
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) out[static_cast<Eigen::Index>(i)] = vals[i];
    return out;
}

struct Reader {
    KvTree& tree;
    std::string section;

    std::optional<std::string> raw(const std::string& key) { return tree.take(section, key); }
    double num(const std::string& key, double dflt)
    {
        auto v = raw(key);
        return v ? parse_number(*v, section + "." + key) : dflt;
    }
    int integer(const std::string& key, int dflt)
    {
        auto v = raw(key);
        return v ? parse_int(*v, section + "." + key) : dflt;
    }
    bool boolean(const std::string& key, bool dflt)
    {
        auto v = raw(key);
        return v ? parse_bool(*v, section + "." + key) : dflt;
    }
    std::string str(const std::string& key, const std::string& dflt)
    {
        auto v = raw(key);
        return v ? *v : dflt;
    }
};

void fail(const std::string& field, const std::string& why)
{
    throw std::invalid_argument("config: " + field + " " + why);
}

void validate(const ExperimentConfig& c)
{
    if (c.basis.dims < 1) fail("basis.M", "must be >= 1");
    if (c.basis.order < 0) fail("basis.K", "must be >= 0");
    if (c.basis.quad_size != 0 && c.basis.quad_size < default_quadrature_size(c.basis.order)) {
        fail("basis.Q", "below the exactness requirement ceil(1.5(K+1))");
    }
    index_set_cardinality(c.basis.dims, c.basis.order, c.basis.kind);  // overflow guard via build later

    if (c.field.sigma2 < 0.0) fail("field.sigma2", "must be >= 0");
    if (c.field.sigma2 > 0.0) {
        if (!(c.field.corr_len > 0.0)) fail("field.corr_length", "must be > 0");
        if (c.field.kernel == CovarianceKernel::Kind::Matern && !(c.field.nu > 0.0)) {
            fail("field.nu", "must be > 0");
        }
        if (c.basis.order < 1) fail("basis.K", "must be >= 1 to embed a random field");
        if (c.field.n_quad != 0 && c.field.n_quad < 4 * c.basis.dims) {
            fail("field.nquad", "must be >= 4*M");
        }
        if (c.field.measure_x.size() != c.field.measure_z.size()) {
            fail("field.measure_x/measure_z", "must have equal lengths");
        }
    }

    if (!(c.material.elastic_modulus > 0.0)) fail("material.E", "must be > 0");
    if (c.material.sensitivity != "relation" && c.material.sensitivity != "bergstrom" &&
        c.material.sensitivity != "drx") {
        fail("material.sensitivity", "must be one of relation, bergstrom, drx");
    }
    if (c.material.sensitivity == "bergstrom" && !c.material.bergstrom) {
        fail("material", "bergstrom sensitivity needs the bergstrom.* parameters");
    }
    if (c.material.sensitivity == "drx" && !c.material.drx) {
        fail("material", "drx sensitivity needs the drx.* parameters");
    }
    if (c.material.kappa0 == -1.0 || c.material.kappa1 == -1.0) {
        fail("material.kappa0/kappa1", "must differ from -1");
    }
    if (c.material.sensitivity != "relation") {
        if (!(c.material.eps_end > 0.0)) fail("material.eps_end", "must be > 0");
        if (c.material.eps_steps < 8) fail("material.eps_steps", "must be >= 8");
    }

    if (!(c.stability.mu_hat > 0.0)) fail("stability.mu_hat", "must be > 0");
    if (!(c.stability.h_plus > 0.0)) fail("stability.h_plus", "must be > 0");
    if (!(c.stability.h_minus > 0.0)) fail("stability.h_minus", "must be > 0");

    if (c.grid.cells < 3) fail("grid.N", "must be >= 3");
    if (!(c.grid.length > 0.0)) fail("grid.L", "must be > 0");
    if (!(c.grid.cfl > 0.0) || c.grid.cfl > 1.0) fail("grid.cfl", "must lie in (0, 1]");
    if (c.grid.t_end < 0.0) fail("grid.t_end", "must be >= 0");

    if (c.initial.coordinates != "riemann" && c.initial.coordinates != "physical") {
        fail("initial.coordinates", "must be riemann or physical");
    }
    if (!(c.initial.frequency > 0.0)) fail("initial.frequency", "must be > 0");
    if (c.output.sample_every < 0) fail("output.sample_every", "must be >= 0");
}

BergstromParams read_bergstrom(Reader r)
{
    BergstromParams p;
    p.u0 = r.num("u0", 0.0);
    p.temperature = r.num("temperature", 0.0);
    p.omega0 = r.num("omega0", 0.0);
    p.c = r.num("c", 0.0);
    p.m = r.num("m", 0.0);
    p.q = r.num("q", 0.0);
    p.gas_constant = r.num("gas_constant", 8.314462618);
    p.strain_rate = r.num("strain_rate", 0.0);
    p.sigma0 = r.num("sigma0", 0.0);
    p.alpha = r.num("alpha", 0.0);
    p.shear_modulus = r.num("shear_modulus", 0.0);
    p.burgers = r.num("burgers", 0.0);
    p.rho_init = r.num("rho_init", 0.0);
    p.validate();
    return p;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text)
{
    KvTree tree = tokenize(text);
    ExperimentConfig c;

    for (const char* required : {"basis", "material", "grid"}) {
        if (!tree.has_section(required)) {
            throw std::invalid_argument(std::string("config: missing required section [") + required + "]");
        }
    }

    {
        Reader r{tree, "basis"};
        c.basis.family = parse_poly_family(r.str("family", "hermite"));
        c.basis.dims = r.integer("M", c.basis.dims);
        c.basis.order = r.integer("K", c.basis.order);
        c.basis.kind = parse_index_set_kind(r.str("set", "sparse"));
        c.basis.quad_size = r.integer("Q", 0);
    }
    {
        Reader r{tree, "field"};
        c.field.kernel = parse_kernel_kind(r.str("kernel", "gaussian"));
        c.field.sigma2 = r.num("sigma2", c.field.sigma2);
        c.field.corr_len = r.num("corr_length", c.field.corr_len);
        c.field.nu = r.num("nu", c.field.nu);
        c.field.n_quad = r.integer("nquad", 0);
        if (auto v = r.raw("measure_x")) c.field.measure_x = parse_list(*v, "field.measure_x");
        if (auto v = r.raw("measure_z")) c.field.measure_z = parse_list(*v, "field.measure_z");
    }
    {
        Reader r{tree, "material"};
        c.material.elastic_modulus = r.num("E", c.material.elastic_modulus);
        c.material.sigma_star = r.num("sigma_star", c.material.sigma_star);
        c.material.v_star = r.num("v_star", c.material.v_star);
        c.material.sensitivity = r.str("sensitivity", c.material.sensitivity);
        c.material.relation_coeff = r.num("relation_coeff", c.material.relation_coeff);
        c.material.eps_end = r.num("eps_end", c.material.eps_end);
        c.material.eps_steps = r.integer("eps_steps", c.material.eps_steps);
        c.material.kappa0 = r.num("kappa0", c.material.kappa0);
        c.material.kappa1 = r.num("kappa1", c.material.kappa1);
    }
    if (tree.has_section("bergstrom")) {
        c.material.bergstrom = read_bergstrom(Reader{tree, "bergstrom"});
    }
    if (tree.has_section("drx")) {
        DrxParams p;
        if (!c.material.bergstrom) {
            throw std::invalid_argument("config: [drx] needs the [bergstrom] base parameters");
        }
        p.base = *c.material.bergstrom;
        Reader r{tree, "drx"};
        p.eps_c = r.num("eps_c", 0.0);
        p.eps_s = r.num("eps_s", 0.0);
        p.kappa_drx = r.num("kappa", 0.0);
        p.q_drx = r.num("q", 0.0);
        p.validate();
        c.material.drx = p;
    }
    {
        Reader r{tree, "stability"};
        c.stability.mu_hat = r.num("mu_hat", c.stability.mu_hat);
        c.stability.h_plus = r.num("h_plus", c.stability.h_plus);
        c.stability.h_minus = r.num("h_minus", c.stability.h_minus);
        c.stability.optimize_scaling = r.boolean("optimize_scaling", false);
    }
    {
        Reader r{tree, "grid"};
        c.grid.cells = r.integer("N", c.grid.cells);
        c.grid.length = r.num("L", c.grid.length);
        c.grid.cfl = r.num("cfl", c.grid.cfl);
        c.grid.t_end = r.num("t_end", c.grid.t_end);
    }
    {
        Reader r{tree, "initial"};
        c.initial.coordinates = r.str("coordinates", c.initial.coordinates);
        c.initial.amp_plus = r.num("amp_plus", c.initial.amp_plus);
        c.initial.amp_minus = r.num("amp_minus", c.initial.amp_minus);
        c.initial.frequency = r.num("frequency", c.initial.frequency);
    }
    {
        Reader r{tree, "output"};
        c.output.directory = r.str("dir", c.output.directory);
        c.output.sample_every = r.integer("sample_every", 0);
    }

    tree.reject_unconsumed({"basis", "field", "material", "bergstrom", "drx", "stability", "grid",
                            "initial", "output"});
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string echo_config(const ExperimentConfig& c)
{
    std::ostringstream os;
    os.precision(17);
    os << "[basis]\n";
    os << "family = " << to_string(c.basis.family) << "\n";
    os << "M = " << c.basis.dims << "\n";
    os << "K = " << c.basis.order << "\n";
    os << "set = " << to_string(c.basis.kind) << "\n";
    if (c.basis.quad_size > 0) os << "Q = " << c.basis.quad_size << "\n";
    os << "\n[field]\n";
    os << "kernel = " << to_string(c.field.kernel) << "\n";
    os << "sigma2 = " << c.field.sigma2 << "\n";
    os << "corr_length = " << c.field.corr_len << "\n";
    if (c.field.kernel == CovarianceKernel::Kind::Matern) os << "nu = " << c.field.nu << "\n";
    if (c.field.n_quad > 0) os << "nquad = " << c.field.n_quad << "\n";
    if (c.field.measure_x.size() > 0) {
        os << "measure_x = ";
        for (Eigen::Index i = 0; i < c.field.measure_x.size(); ++i) {
            os << (i ? ", " : "") << c.field.measure_x[i];
        }
        os << "\nmeasure_z = ";
        for (Eigen::Index i = 0; i < c.field.measure_z.size(); ++i) {
            os << (i ? ", " : "") << c.field.measure_z[i];
        }
        os << "\n";
    }
    os << "\n[material]\n";
    os << "E = " << c.material.elastic_modulus << "\n";
    os << "sigma_star = " << c.material.sigma_star << "\n";
    os << "v_star = " << c.material.v_star << "\n";
    os << "sensitivity = " << c.material.sensitivity << "\n";
    os << "relation_coeff = " << c.material.relation_coeff << "\n";
    if (c.material.sensitivity != "relation") {
        os << "eps_end = " << c.material.eps_end << "\n";
        os << "eps_steps = " << c.material.eps_steps << "\n";
    }
    os << "kappa0 = " << c.material.kappa0 << "\n";
    os << "kappa1 = " << c.material.kappa1 << "\n";
    if (c.material.bergstrom) {
        const BergstromParams& p = *c.material.bergstrom;
        os << "\n[bergstrom]\n";
        os << "u0 = " << p.u0 << "\n";
        os << "temperature = " << p.temperature << "\n";
        os << "omega0 = " << p.omega0 << "\n";
        os << "c = " << p.c << "\n";
        os << "m = " << p.m << "\n";
        os << "q = " << p.q << "\n";
        os << "gas_constant = " << p.gas_constant << "\n";
        os << "strain_rate = " << p.strain_rate << "\n";
        os << "sigma0 = " << p.sigma0 << "\n";
        os << "alpha = " << p.alpha << "\n";
        os << "shear_modulus = " << p.shear_modulus << "\n";
        os << "burgers = " << p.burgers << "\n";
        os << "rho_init = " << p.rho_init << "\n";
    }
    if (c.material.drx) {
        const DrxParams& p = *c.material.drx;
        os << "\n[drx]\n";
        os << "eps_c = " << p.eps_c << "\n";
        os << "eps_s = " << p.eps_s << "\n";
        os << "kappa = " << p.kappa_drx << "\n";
        os << "q = " << p.q_drx << "\n";
    }
    os << "\n[stability]\n";
    os << "mu_hat = " << c.stability.mu_hat << "\n";
    os << "h_plus = " << c.stability.h_plus << "\n";
    os << "h_minus = " << c.stability.h_minus << "\n";
    os << "optimize_scaling = " << (c.stability.optimize_scaling ? "true" : "false") << "\n";
    os << "\n[grid]\n";
    os << "N = " << c.grid.cells << "\n";
    os << "L = " << c.grid.length << "\n";
    os << "cfl = " << c.grid.cfl << "\n";
    os << "t_end = " << c.grid.t_end << "\n";
    os << "\n[initial]\n";
    os << "coordinates = " << c.initial.coordinates << "\n";
    os << "amp_plus = " << c.initial.amp_plus << "\n";
    os << "amp_minus = " << c.initial.amp_minus << "\n";
    os << "frequency = " << c.initial.frequency << "\n";
    os << "\n[output]\n";
    os << "dir = " << c.output.directory << "\n";
    os << "sample_every = " << c.output.sample_every << "\n";
    return os.str();
}

double plastic_slope(const MaterialConfig& material)
{
    if (material.sensitivity == "relation") {
        return material.relation_coeff * material.sigma_star;
    }
    Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(material.eps_steps + 1, 0.0, material.eps_end);
    StressStrainCurve curve;
    if (material.sensitivity == "bergstrom") {
        curve = bergstrom_stress(grid, *material.bergstrom);
    } else {
        curve = drx_stress(grid, *material.drx);
    }
    return linearize_plastic(curve, material.sigma_star);
}

}  // namespace sgstab
