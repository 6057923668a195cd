#include "serrin/config.hpp"

#include "serrin/errors.hpp"
#include "serrin/symfun.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace serrin {

using nlohmann::json;

SymMatrix RunConfig::A() const {
    const auto n = static_cast<std::size_t>(d);
    if (!A_dense.empty()) {
        Eigen::MatrixXd m(d, d);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = A_dense[i][j];
        return SymMatrix::from_dense(m);
    }
    if (!A_eigenvalues.empty()) return SymMatrix::diagonal(A_eigenvalues);
    return SymMatrix::identity(n);
}

ProblemSpec RunConfig::problem() const {
    ProblemSpec s;
    s.d = d;
    s.k = k;
    s.A = A();
    s.b = b.empty() ? std::vector<double>(static_cast<std::size_t>(d), 0.0) : b;
    s.c = c;
    return s;
}

json RunConfig::to_json() const {
    json j;
    j["d"] = d;
    j["k"] = k;
    if (!A_dense.empty())
        j["A"] = A_dense;
    else if (!A_eigenvalues.empty())
        j["A"] = A_eigenvalues;
    j["b"] = b;
    j["c"] = c;
    j["R"] = R;
    j["grid"] = {{"n_r", grid.n_r},
                 {"n_theta", grid.n_theta},
                 {"n_phi", grid.n_phi},
                 {"max_first_spacing", grid.max_first_spacing}};
    j["solver"] = {{"newton_tol", solver.newton_tol},   {"max_newton", solver.max_newton},
                   {"max_halvings", solver.max_halvings}, {"dt_init", solver.dt_init},
                   {"dt_min", solver.dt_min},           {"dt_max", solver.dt_max},
                   {"dt_grow", solver.dt_grow},         {"easy_iterations", solver.easy_iterations},
                   {"linear_rtol", solver.linear_rtol}, {"direct_limit", solver.direct_limit},
                   {"bound_tol_rel", solver.bound_tol_rel}, {"min_R", solver.min_R}};
    j["verify"] = {{"free_boundary_u", verify.free_boundary_u},
                   {"free_boundary_grad", verify.free_boundary_grad},
                   {"sandwich", verify.sandwich},
                   {"curvature", verify.identities.curvature},
                   {"area", verify.identities.area},
                   {"phi", verify.identities.phi},
                   {"maclaurin", verify.identities.maclaurin}};
    j["radial"] = {{"r0", radial.r0},
                   {"rmax", radial.rmax},
                   {"npts", radial.npts},
                   {"spacing", radial.spacing == Spacing::Uniform ? "uniform" : "geometric"},
                   {"allow_k_convex", radial.allow_k_convex}};
    j["legendre"] = {{"input", legendre.input},
                     {"source_r_in", legendre.source_r_in},
                     {"source_r_out", legendre.source_r_out},
                     {"source_n_r", legendre.source_n_r},
                     {"target_r_in", legendre.target_r_in},
                     {"target_r_out", legendre.target_r_out},
                     {"target_n_r", legendre.target_n_r},
                     {"n_theta", legendre.n_theta},
                     {"n_phi", legendre.n_phi},
                     {"target_value", legendre.target_value}};
    j["output_dir"] = output_dir;
    j["checkpoint_steps"] = checkpoint_steps;
    return j;
}

namespace {

template <class T>
void take(const json& obj, const char* key, T& dst, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        dst = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw DomainError("config key '" + where + key + "' has the wrong type");
    }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw DomainError("unknown config key '" + where + it.key() + "'");
    }
}

const json& section(const json& j, const char* key) {
    static const json empty = json::object();
    if (!j.contains(key)) return empty;
    if (!j.at(key).is_object()) throw DomainError(std::string("config key '") + key + "' must be a table");
    return j.at(key);
}

}  // namespace

RunConfig config_from_json(const json& j) {
    if (!j.is_object()) throw DomainError("config must be an object");
    reject_unknown(j,
                   {"d", "k", "A", "b", "c", "R", "grid", "solver", "verify", "radial", "legendre",
                    "output_dir", "checkpoint_steps"},
                   "");
    RunConfig cfg;
    take(j, "d", cfg.d, "");
    take(j, "k", cfg.k, "");
    if (j.contains("A")) {
        const auto& a = j.at("A");
        if (!a.is_array() || a.empty()) throw DomainError("config key 'A' must be a non-empty array");
        if (a.front().is_array())
            take(j, "A", cfg.A_dense, "");
        else
            take(j, "A", cfg.A_eigenvalues, "");
    }
    take(j, "b", cfg.b, "");
    take(j, "c", cfg.c, "");
    if (j.contains("R")) {
        if (j.at("R").is_number())
            cfg.R = {j.at("R").get<double>()};
        else
            take(j, "R", cfg.R, "");
    }
    take(j, "output_dir", cfg.output_dir, "");
    take(j, "checkpoint_steps", cfg.checkpoint_steps, "");

    const auto& g = section(j, "grid");
    reject_unknown(g, {"n_r", "n_theta", "n_phi", "max_first_spacing"}, "grid.");
    take(g, "n_r", cfg.grid.n_r, "grid.");
    take(g, "n_theta", cfg.grid.n_theta, "grid.");
    take(g, "n_phi", cfg.grid.n_phi, "grid.");
    take(g, "max_first_spacing", cfg.grid.max_first_spacing, "grid.");

    const auto& s = section(j, "solver");
    reject_unknown(s,
                   {"newton_tol", "max_newton", "max_halvings", "dt_init", "dt_min", "dt_max", "dt_grow",
                    "easy_iterations", "linear_rtol", "direct_limit", "bound_tol_rel", "min_R"},
                   "solver.");
    take(s, "newton_tol", cfg.solver.newton_tol, "solver.");
    take(s, "max_newton", cfg.solver.max_newton, "solver.");
    take(s, "max_halvings", cfg.solver.max_halvings, "solver.");
    take(s, "dt_init", cfg.solver.dt_init, "solver.");
    take(s, "dt_min", cfg.solver.dt_min, "solver.");
    take(s, "dt_max", cfg.solver.dt_max, "solver.");
    take(s, "dt_grow", cfg.solver.dt_grow, "solver.");
    take(s, "easy_iterations", cfg.solver.easy_iterations, "solver.");
    take(s, "linear_rtol", cfg.solver.linear_rtol, "solver.");
    take(s, "direct_limit", cfg.solver.direct_limit, "solver.");
    take(s, "bound_tol_rel", cfg.solver.bound_tol_rel, "solver.");
    take(s, "min_R", cfg.solver.min_R, "solver.");

    const auto& v = section(j, "verify");
    reject_unknown(v, {"free_boundary_u", "free_boundary_grad", "sandwich", "curvature", "area", "phi", "maclaurin"},
                   "verify.");
    take(v, "free_boundary_u", cfg.verify.free_boundary_u, "verify.");
    take(v, "free_boundary_grad", cfg.verify.free_boundary_grad, "verify.");
    take(v, "sandwich", cfg.verify.sandwich, "verify.");
    take(v, "curvature", cfg.verify.identities.curvature, "verify.");
    take(v, "area", cfg.verify.identities.area, "verify.");
    take(v, "phi", cfg.verify.identities.phi, "verify.");
    take(v, "maclaurin", cfg.verify.identities.maclaurin, "verify.");

    const auto& r = section(j, "radial");
    reject_unknown(r, {"r0", "rmax", "npts", "spacing", "allow_k_convex"}, "radial.");
    take(r, "r0", cfg.radial.r0, "radial.");
    take(r, "rmax", cfg.radial.rmax, "radial.");
    take(r, "npts", cfg.radial.npts, "radial.");
    take(r, "allow_k_convex", cfg.radial.allow_k_convex, "radial.");
    if (r.contains("spacing")) {
        std::string sp;
        take(r, "spacing", sp, "radial.");
        if (sp == "uniform")
            cfg.radial.spacing = Spacing::Uniform;
        else if (sp == "geometric")
            cfg.radial.spacing = Spacing::Geometric;
        else
            throw DomainError("config key 'radial.spacing' must be \"uniform\" or \"geometric\"");
    }

    const auto& l = section(j, "legendre");
    reject_unknown(l,
                   {"input", "source_r_in", "source_r_out", "source_n_r", "target_r_in", "target_r_out",
                    "target_n_r", "n_theta", "n_phi", "target_value"},
                   "legendre.");
    take(l, "input", cfg.legendre.input, "legendre.");
    take(l, "source_r_in", cfg.legendre.source_r_in, "legendre.");
    take(l, "source_r_out", cfg.legendre.source_r_out, "legendre.");
    take(l, "source_n_r", cfg.legendre.source_n_r, "legendre.");
    take(l, "target_r_in", cfg.legendre.target_r_in, "legendre.");
    take(l, "target_r_out", cfg.legendre.target_r_out, "legendre.");
    take(l, "target_n_r", cfg.legendre.target_n_r, "legendre.");
    take(l, "n_theta", cfg.legendre.n_theta, "legendre.");
    take(l, "n_phi", cfg.legendre.n_phi, "legendre.");
    take(l, "target_value", cfg.legendre.target_value, "legendre.");
    return cfg;
}

// ---- TOML subset --------------------------------------------------------------------------

namespace {

class TomlLine {
public:
    TomlLine(const std::string& s, int line) : s_(s), line_(line) {}

    json value() {
        skip();
        if (pos_ >= s_.size()) fail("missing value");
        const char c = s_[pos_];
        if (c == '"') return string();
        if (c == '[') return array();
        if (s_.compare(pos_, 4, "true") == 0) {
            pos_ += 4;
            return true;
        }
        if (s_.compare(pos_, 5, "false") == 0) {
            pos_ += 5;
            return false;
        }
        return number();
    }

    void expect_end() {
        skip();
        if (pos_ < s_.size() && s_[pos_] != '#') fail("unexpected text after value");
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw FormatError("toml line " + std::to_string(line_) + ": " + what);
    }

private:
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    json string() {
        ++pos_;
        std::string out;
        while (pos_ < s_.size() && s_[pos_] != '"') {
            if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) {
                const char e = s_[++pos_];
                out += e == 'n' ? '\n' : (e == 't' ? '\t' : e);
            } else {
                out += s_[pos_];
            }
            ++pos_;
        }
        if (pos_ >= s_.size()) fail("unterminated string");
        ++pos_;
        return out;
    }

    json array() {
        ++pos_;
        json arr = json::array();
        for (;;) {
            skip();
            if (pos_ >= s_.size()) fail("unterminated array");
            if (s_[pos_] == ']') {
                ++pos_;
                return arr;
            }
            arr.push_back(value());
            skip();
            if (pos_ < s_.size() && s_[pos_] == ',') ++pos_;
        }
    }

    json number() {
        std::size_t end = pos_;
        while (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '.' ||
                                   s_[end] == '-' || s_[end] == '+' || s_[end] == '_'))
            ++end;
        std::string tok;
        for (std::size_t i = pos_; i < end; ++i)
            if (s_[i] != '_') tok += s_[i];
        if (tok.empty()) fail("expected a value");
        pos_ = end;
        const bool integral = tok.find_first_of(".eE") == std::string::npos && tok != "inf" && tok != "nan";
        if (integral) {
            long long v = 0;
            auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec == std::errc() && p == tok.data() + tok.size()) return v;
        }
        double v = 0.0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size()) fail("'" + tok + "' is not a number");
        return v;
    }

    const std::string& s_;
    std::size_t pos_ = 0;
    int line_;
};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

json parse_flat_toml(const std::string& text) {
    json root = json::object();
    json::json_pointer table("");
    std::istringstream is(text);
    std::string raw;
    int line = 0;
    while (std::getline(is, raw)) {
        ++line;
        const std::string s = trim(raw);
        if (s.empty() || s[0] == '#') continue;
        if (s[0] == '[') {
            const auto close = s.find(']');
            if (close == std::string::npos) throw FormatError("toml line " + std::to_string(line) + ": unterminated table header");
            std::string name = trim(s.substr(1, close - 1));
            std::string ptr;
            std::istringstream parts(name);
            std::string part;
            while (std::getline(parts, part, '.')) ptr += "/" + trim(part);
            table = json::json_pointer(ptr);
            if (!root.contains(table)) root[table] = json::object();
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw FormatError("toml line " + std::to_string(line) + ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        if (key.size() >= 2 && key.front() == '"' && key.back() == '"') key = key.substr(1, key.size() - 2);
        const std::string rest = s.substr(eq + 1);
        TomlLine tl(rest, line);
        json v = tl.value();
        tl.expect_end();
        json& tab = root[table];
        if (tab.contains(key)) tl.fail("duplicate key '" + key + "'");
        tab[key] = std::move(v);
    }
    return root;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot read config " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    if (path.extension() == ".toml") return config_from_json(parse_flat_toml(ss.str()));
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw FormatError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

void validate(const RunConfig& cfg, bool need_admissible) {
    if (cfg.d < 2) throw DomainError("config key 'd' must be at least 2");
    if (cfg.k < 1 || cfg.k > cfg.d) throw DomainError("config key 'k' must satisfy 1 <= k <= d");
    const auto n = static_cast<std::size_t>(cfg.d);
    if (!cfg.A_eigenvalues.empty() && cfg.A_eigenvalues.size() != n)
        throw DomainError("config key 'A' needs d = " + std::to_string(cfg.d) + " eigenvalues");
    if (!cfg.A_dense.empty()) {
        if (cfg.A_dense.size() != n) throw DomainError("config key 'A' needs d rows");
        for (std::size_t i = 0; i < n; ++i) {
            if (cfg.A_dense[i].size() != n) throw DomainError("config key 'A' needs d columns in every row");
            for (std::size_t j = 0; j < i; ++j)
                if (std::abs(cfg.A_dense[i][j] - cfg.A_dense[j][i]) > 1e-12 * (1.0 + std::abs(cfg.A_dense[i][j])))
                    throw DomainError("config key 'A' must be symmetric");
        }
    }
    if (!cfg.b.empty() && cfg.b.size() != n) throw DomainError("config key 'b' needs d entries");
    if (cfg.R.empty()) throw DomainError("config key 'R' must list at least one radius");
    for (std::size_t i = 0; i < cfg.R.size(); ++i) {
        if (!(cfg.R[i] > 1.0)) throw DomainError("config key 'R' entries must exceed 1");
        if (i > 0 && !(cfg.R[i] > cfg.R[i - 1])) throw DomainError("config key 'R' must increase");
    }
    if (cfg.grid.n_r < 4 || cfg.grid.n_theta < 2 || cfg.grid.n_phi < 4 || cfg.grid.n_phi % 2 != 0)
        throw DomainError("config table 'grid' needs n_r >= 4, n_theta >= 2 and even n_phi >= 4");
    if (!(cfg.grid.max_first_spacing > 0.0)) throw DomainError("config key 'grid.max_first_spacing' must be positive");
    if (need_admissible) {
        const auto lam = spectrum(cfg.A());
        if (lam.min() <= 0.0) throw AdmissibilityError("A must be positive definite");
        const double s = sigma_k(lam, cfg.k);
        const double want = binomial(cfg.d, cfg.k);
        if (std::abs(s - want) > 1e-8) {
            throw AdmissibilityError("sigma_k(lambda(A)) = " + std::to_string(s) + " but must equal C(d,k) = " +
                                     std::to_string(want) + " within 1e-8");
        }
    }
}

}  // namespace serrin
