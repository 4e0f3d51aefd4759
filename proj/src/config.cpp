#include "klrlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "klrlab/error.hpp"

namespace klrlab {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '(') ++depth;
        if (s[i] == ')' && depth > 0) --depth;
        if (s[i] == sep && depth == 0) {
            out.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    out.push_back(trim(s.substr(start)));
    return out;
}

double to_real(const std::string& field, const std::string& text) {
    double value = 0.0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty()) throw ConfigError(field, "expected a real number, got '" + text + "'");
    return value;
}

std::uint64_t to_uint(const std::string& field, const std::string& text) {
    std::uint64_t value = 0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty()) {
        throw ConfigError(field, "expected a nonnegative integer, got '" + text + "'");
    }
    return value;
}

bool to_bool(const std::string& field, const std::string& text) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ConfigError(field, "expected true or false, got '" + text + "'");
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

using Record = std::map<std::string, std::string>;

DistributionSpec spec_from_record(const std::string& where, const Record& record) {
    const auto kind_it = record.find("kind");
    if (kind_it == record.end()) throw ConfigError(where + ".kind", "missing distribution kind");
    const std::string& kind = kind_it->second;

    static const std::map<std::string, std::set<std::string>> allowed = {
        {"gaussian", {"mean", "variance"}},
        {"laplace", {"mean", "scale"}},
        {"uniform", {"lo", "hi"}},
        {"exponential", {"rate", "centered", "shift"}},
        {"mixture", {"weights", "components"}},
    };
    const auto kind_keys = allowed.find(kind);
    if (kind_keys == allowed.end()) throw ConfigError(where + ".kind", "unknown distribution kind '" + kind + "'");
    for (const auto& [key, value] : record) {
        if (key == "kind" || key == "gauss_component_variance") continue;
        if (!kind_keys->second.contains(key)) throw ConfigError(where + "." + key, "unknown key for kind " + kind);
    }

    auto real = [&](const std::string& key, double fallback) {
        const auto it = record.find(key);
        return it == record.end() ? fallback : to_real(where + "." + key, it->second);
    };

    auto build = [&]() -> DistributionSpec {
        try {
            if (kind == "gaussian") return DistributionSpec::gaussian(real("mean", 0.0), real("variance", 1.0));
            if (kind == "laplace") return DistributionSpec::laplace(real("mean", 0.0), real("scale", 1.0));
            if (kind == "uniform") return DistributionSpec::uniform(real("lo", -1.0), real("hi", 1.0));
            if (kind == "exponential") {
                const auto c = record.find("centered");
                const bool is_centered = c != record.end() && to_bool(where + ".centered", c->second);
                DistributionSpec e = DistributionSpec::exponential(real("rate", 1.0), is_centered);
                const double shift = real("shift", 0.0);
                return shift == 0.0 ? e : shifted(e, shift);
            }
            const auto w = record.find("weights");
            const auto comps = record.find("components");
            if (w == record.end() || comps == record.end()) {
                throw ConfigError(where, "mixture needs weights and components");
            }
            std::vector<double> weights;
            for (const auto& item : split(w->second, ',')) weights.push_back(to_real(where + ".weights", item));
            std::vector<DistributionSpec> components;
            for (const auto& item : split(comps->second, ';')) components.push_back(parse_spec_expression(item));
            return DistributionSpec::mixture(std::move(weights), std::move(components));
        } catch (const InvalidArgument& e) {
            throw ConfigError(where, e.what());
        }
    };

    DistributionSpec spec = build();
    if (const auto g = record.find("gauss_component_variance"); g != record.end()) {
        const double v = to_real(where + ".gauss_component_variance", g->second);
        if (!(v > 0.0)) throw ConfigError(where + ".gauss_component_variance", "must be > 0");
        spec = convolve_gaussian(spec, v);
    }
    return spec;
}

Record record_from_spec(const DistributionSpec& spec) {
    Record r;
    const DistributionSpec* base = &spec;
    if (const auto* g = std::get_if<dist::GaussConvolved>(&spec.variant())) {
        r["gauss_component_variance"] = fmt(g->added_variance);
        base = g->base.get();
    }
    r["kind"] = base->kind();
    const auto& v = base->variant();
    if (const auto* p = std::get_if<dist::Gaussian>(&v)) {
        r["mean"] = fmt(p->mean);
        r["variance"] = fmt(p->variance);
    } else if (const auto* p = std::get_if<dist::Laplace>(&v)) {
        r["mean"] = fmt(p->mean);
        r["scale"] = fmt(p->scale);
    } else if (const auto* p = std::get_if<dist::Uniform>(&v)) {
        r["lo"] = fmt(p->lo);
        r["hi"] = fmt(p->hi);
    } else if (const auto* p = std::get_if<dist::Exponential>(&v)) {
        r["rate"] = fmt(p->rate);
        r["centered"] = p->centered ? "true" : "false";
        if (p->shift != 0.0) r["shift"] = fmt(p->shift);
    } else if (const auto* p = std::get_if<dist::Mixture>(&v)) {
        std::string w, c;
        for (std::size_t i = 0; i < p->weights.size(); ++i) {
            if (i) {
                w += ", ";
                c += "; ";
            }
            w += fmt(p->weights[i]);
            c += render_spec_expression(p->components[i]);
        }
        r["weights"] = w;
        r["components"] = c;
    }
    return r;
}

ParamInfo p(std::string key, std::string type, std::string description) {
    return ParamInfo{std::move(key), std::move(type), std::move(description)};
}

std::vector<ParamInfo> common_seed_keys() {
    return {p("seed_root", "int", "root of the counter-based random stream"),
            p("seed_stream", "int", "stream id under the root"),
            p("output_dir", "text", "directory receiving report.json and CSV files")};
}

std::vector<ParamInfo> klr_keys() {
    std::vector<ParamInfo> keys = {
        p("spec1", "spec", "law of X_i"),
        p("spec2", "spec", "law of Y_i"),
        p("a", "real", "weight of Xbar in the target"),
        p("b", "real", "weight of Ybar in the target"),
        p("n", "int", "tuple size, >= 2 (characterization needs >= 3)"),
        p("N", "int", "Monte Carlo replicates, >= 2"),
        p("k", "int", "kNN neighbours; 0 selects ceil(sqrt(N))"),
        p("B", "int", "permutations for the null band, >= 100"),
        p("x_path", "text", "optional file of X values (one per line)"),
        p("y_path", "text", "optional file of Y values (one per line)"),
    };
    for (auto& k : common_seed_keys()) keys.push_back(k);
    return keys;
}

std::vector<ParamInfo> grid_keys() {
    return {p("epsilon", "real", "CF grid half-width"), p("grid_points", "int", "odd number of CF grid points")};
}

std::vector<ParamInfo> concat(std::vector<ParamInfo> a, const std::vector<ParamInfo>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

std::vector<ScenarioInfo> build_catalog() {
    std::vector<ScenarioInfo> out;
    out.push_back({"lemma1",
                   "E{Xbar | X_j - Xbar + Y_j - Ybar} = const (Eq. 2): a=1, b=0 with Gaussian X and arbitrary Y",
                   "pass", klr_keys()});
    out.push_back({"theorem1", "E{a Xbar + b Ybar | residuals} = const (Eq. 8) for Gaussian X and Y, ab > 0", "pass",
                   klr_keys()});
    out.push_back({"theorem1_power",
                   "Eq. 8 with non-Gaussian (centered exponential) X and Y: the relation fails", "reject",
                   klr_keys()});
    out.push_back({"theorem2_equal",
                   "E{Xbar | residuals} = E{Ybar | residuals} (Eq. 13) for identically distributed X and Y", "pass",
                   klr_keys()});
    out.push_back({"theorem2_component",
                   "Eq. 13 when X = Y + Gaussian; also checks f1 = f2 exp(c t^2 / 2) (Eq. 15) and the component "
                   "variance",
                   "pass",
                   concat(klr_keys(), concat(grid_keys(), {p("tolerance", "real", "component-scan resolution")}))});
    out.push_back({"theorem3",
                   "E(s_X^2 | Xbar + Ybar) = E(s_Y^2 | Xbar + Ybar) + c (Eq. 17), c = var X - var Y", "pass",
                   concat({p("spec1", "spec", "law of X_i"), p("spec2", "spec", "law of Y_i"),
                           p("n", "int", "tuple size, >= 2"), p("N", "int", "Monte Carlo replicates"),
                           p("trim", "real", "central mass of the conditioning values used"),
                           p("conditioning_points", "int", "evaluation points for the curves"),
                           p("x_path", "text", "optional file of X values"),
                           p("y_path", "text", "optional file of Y values")},
                          common_seed_keys())});
    out.push_back({"lukacs", "E(s_X^2 | Xbar) = const (Eq. 16)", "pass",
                   concat({p("spec1", "spec", "law of X_i"), p("n", "int", "tuple size, >= 2"),
                           p("N", "int", "Monte Carlo replicates"), p("B", "int", "permutations, >= 100"),
                           p("x_path", "text", "optional file of X values")},
                          common_seed_keys())});
    out.push_back({"lemma2_product",
                   "prod_i f_i(t)^alpha_i = exp(c t^2) (Eq. 12) on exact CFs", "pass",
                   concat({p("spec1", "spec", "first factor"), p("spec2", "spec", "second factor"),
                           p("alphas", "list", "positive exponents, one per factor"),
                           p("c", "real", "exponent of the Gaussian right side; default from the variances"),
                           p("tolerance", "real", "largest accepted residual")},
                          concat(grid_keys(), {p("output_dir", "text", "output directory")}))});
    out.push_back({"cauchy_probe",
                   "sum_i g(tau_i) = 0 whenever sum_i tau_i = 0 (Eq. 10) and linearity g(t) = c t", "pass",
                   concat({p("spec1", "spec", "law of X_i"), p("spec2", "spec", "law of Y_i"),
                           p("a", "real", "weight of (log f1)'"), p("b", "real", "weight of (log f2)'"),
                           p("n", "int", "tuple size"), p("tuples", "int", "number of zero-sum tuples"),
                           p("tolerance", "real", "largest accepted residual; 0 uses the interpolation bound"),
                           p("source", "text", "exact or empirical CFs"),
                           p("N", "int", "draws per law for empirical CFs"),
                           p("x_path", "text", "optional file of X values"),
                           p("y_path", "text", "optional file of Y values")},
                          concat(grid_keys(), common_seed_keys()))});
    out.push_back({"component_scan",
                   "largest v with f(t) exp(v t^2 / 2) still a CF on the grid: the Gaussian component of X ~ U + xi "
                   "(Theorem 2, Eq. 15)",
                   "pass",
                   concat({p("spec1", "spec", "law of X_i"), p("source", "text", "exact or empirical CF"),
                           p("N", "int", "draws for the empirical CF"),
                           p("tolerance", "real", "bisection resolution"),
                           p("x_path", "text", "optional file of X values")},
                          concat(grid_keys(), common_seed_keys()))});
    return out;
}

bool has_key(const ScenarioInfo& info, std::string_view key) {
    return std::any_of(info.params.begin(), info.params.end(), [&](const ParamInfo& p) { return p.key == key; });
}

void validate(const ExperimentConfig& c) {
    if (c.n < 2) throw ConfigError("n", "must be >= 2");
    if (c.N < 2) throw ConfigError("N", "must be >= 2");
    if (c.k > c.N) throw ConfigError("k", "must be <= N");
    if (c.B < 100) throw ConfigError("B", "must be >= 100");
    if (!(c.epsilon > 0.0)) throw ConfigError("epsilon", "must be > 0");
    if (c.grid_points < 5 || c.grid_points % 2 == 0) throw ConfigError("grid_points", "must be odd and >= 5");
    if (!(c.trim > 0.0 && c.trim <= 1.0)) throw ConfigError("trim", "must lie in (0, 1]");
    if (c.conditioning_points < 2) throw ConfigError("conditioning_points", "must be >= 2");
    if (c.tolerance < 0.0) throw ConfigError("tolerance", "must be >= 0");
    if (c.tuples < 1) throw ConfigError("tuples", "must be >= 1");
    if (c.source != "exact" && c.source != "empirical") throw ConfigError("source", "must be exact or empirical");
    for (double a : c.alphas) {
        if (!(a > 0.0)) throw ConfigError("alphas", "exponents must be positive");
    }
}

}  // namespace

const std::vector<ScenarioInfo>& scenario_catalog() {
    static const std::vector<ScenarioInfo> catalog = build_catalog();
    return catalog;
}

const ScenarioInfo& scenario_info(std::string_view name) {
    for (const auto& s : scenario_catalog()) {
        if (s.name == name) return s;
    }
    throw ConfigError("scenario", "unknown scenario '" + std::string(name) + "'");
}

ExperimentConfig default_config(std::string_view name) {
    const ScenarioInfo& info = scenario_info(name);
    ExperimentConfig c;
    c.scenario = info.name;
    const auto gauss = DistributionSpec::gaussian(0.0, 1.0);
    const auto lap = DistributionSpec::laplace(0.0, 1.0);
    const auto expo = DistributionSpec::exponential(1.0, true);
    const auto lap_gauss = convolve_gaussian(lap, 1.0);
    if (name == "lemma1") {
        c.spec1 = gauss;
        c.spec2 = lap;
        c.b = 0.0;
    } else if (name == "theorem1") {
        c.spec1 = gauss;
        c.spec2 = gauss;
    } else if (name == "theorem1_power") {
        c.spec1 = expo;
        c.spec2 = expo;
    } else if (name == "theorem2_equal") {
        c.spec1 = expo;
        c.spec2 = expo;
        c.b = -1.0;
    } else if (name == "theorem2_component") {
        c.spec1 = lap_gauss;
        c.spec2 = lap;
        c.b = -1.0;
        c.tolerance = 1e-3;
    } else if (name == "theorem3") {
        c.spec1 = lap_gauss;
        c.spec2 = lap;
        c.n = 4;
        c.N = 40000;
    } else if (name == "lukacs") {
        c.spec1 = gauss;
        c.n = 4;
    } else if (name == "lemma2_product") {
        c.spec1 = gauss;
        c.spec2 = gauss;
        c.alphas = {1.0, 1.0};
        c.tolerance = 1e-10;
    } else if (name == "cauchy_probe") {
        c.spec1 = gauss;
        c.spec2 = gauss;
        c.N = 100000;
    } else if (name == "component_scan") {
        c.spec1 = lap_gauss;
        c.source = "empirical";
        c.N = 100000;
        c.tolerance = 1e-3;
    }
    return c;
}

ExperimentConfig parse_config(std::string_view text) {
    struct Line {
        std::size_t number;
        std::string section;
        std::string key;
        std::string value;
    };
    std::vector<Line> lines;
    std::string section;
    std::set<std::string> seen_sections;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t number = 0;
    while (std::getline(in, raw)) {
        ++number;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(number), "malformed section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (section != "spec1" && section != "spec2") throw ConfigError(section, "unknown section");
            if (!seen_sections.insert(section).second) throw ConfigError(section, "section repeated");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number), "expected key = value");
        lines.push_back({number, section, trim(std::string_view(line).substr(0, eq)),
                         trim(std::string_view(line).substr(eq + 1))});
    }

    std::string scenario;
    for (const auto& l : lines) {
        if (l.section.empty() && l.key == "scenario") scenario = l.value;
    }
    if (scenario.empty()) throw ConfigError("scenario", "missing scenario name");
    ExperimentConfig c = default_config(scenario);
    const ScenarioInfo& info = scenario_info(scenario);

    std::map<std::string, Record> records;
    std::set<std::string> seen;
    for (const auto& l : lines) {
        if (!l.section.empty()) {
            if (!has_key(info, l.section)) throw ConfigError(l.section, "not used by scenario " + scenario);
            if (!records[l.section].emplace(l.key, l.value).second) {
                throw ConfigError(l.section + "." + l.key, "key repeated");
            }
            continue;
        }
        if (!seen.insert(l.key).second) throw ConfigError(l.key, "key repeated");
        if (l.key == "scenario") continue;
        if (!has_key(info, l.key) || l.key == "spec1" || l.key == "spec2") {
            throw ConfigError(l.key, "unknown key for scenario " + scenario);
        }
        const std::string& v = l.value;
        if (l.key == "a") c.a = to_real(l.key, v);
        else if (l.key == "b") c.b = to_real(l.key, v);
        else if (l.key == "n") c.n = to_uint(l.key, v);
        else if (l.key == "N") c.N = to_uint(l.key, v);
        else if (l.key == "k") c.k = to_uint(l.key, v);
        else if (l.key == "B") c.B = to_uint(l.key, v);
        else if (l.key == "epsilon") c.epsilon = to_real(l.key, v);
        else if (l.key == "grid_points") c.grid_points = to_uint(l.key, v);
        else if (l.key == "seed_root") c.seed.root = to_uint(l.key, v);
        else if (l.key == "seed_stream") c.seed.stream = to_uint(l.key, v);
        else if (l.key == "output_dir") c.output_dir = v;
        else if (l.key == "alphas") {
            c.alphas.clear();
            for (const auto& item : split(v, ',')) c.alphas.push_back(to_real(l.key, item));
        } else if (l.key == "c") c.c = to_real(l.key, v);
        else if (l.key == "tuples") c.tuples = to_uint(l.key, v);
        else if (l.key == "tolerance") c.tolerance = to_real(l.key, v);
        else if (l.key == "trim") c.trim = to_real(l.key, v);
        else if (l.key == "conditioning_points") c.conditioning_points = to_uint(l.key, v);
        else if (l.key == "source") c.source = v;
        else if (l.key == "x_path") c.x_path = v;
        else if (l.key == "y_path") c.y_path = v;
    }
    if (auto it = records.find("spec1"); it != records.end()) c.spec1 = spec_from_record("spec1", it->second);
    if (auto it = records.find("spec2"); it != records.end()) c.spec2 = spec_from_record("spec2", it->second);
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string render_config(const ExperimentConfig& c) {
    const ScenarioInfo& info = scenario_info(c.scenario);
    std::ostringstream os;
    os << "scenario = " << c.scenario << '\n';
    for (const auto& param : info.params) {
        const std::string& k = param.key;
        if (k == "spec1" || k == "spec2") continue;
        if (k == "a") os << "a = " << fmt(c.a) << '\n';
        else if (k == "b") os << "b = " << fmt(c.b) << '\n';
        else if (k == "n") os << "n = " << c.n << '\n';
        else if (k == "N") os << "N = " << c.N << '\n';
        else if (k == "k") os << "k = " << c.k << '\n';
        else if (k == "B") os << "B = " << c.B << '\n';
        else if (k == "epsilon") os << "epsilon = " << fmt(c.epsilon) << '\n';
        else if (k == "grid_points") os << "grid_points = " << c.grid_points << '\n';
        else if (k == "seed_root") os << "seed_root = " << c.seed.root << '\n';
        else if (k == "seed_stream") os << "seed_stream = " << c.seed.stream << '\n';
        else if (k == "output_dir") os << "output_dir = " << c.output_dir << '\n';
        else if (k == "alphas" && !c.alphas.empty()) {
            os << "alphas = ";
            for (std::size_t i = 0; i < c.alphas.size(); ++i) os << (i ? ", " : "") << fmt(c.alphas[i]);
            os << '\n';
        } else if (k == "c" && c.c) os << "c = " << fmt(*c.c) << '\n';
        else if (k == "tuples") os << "tuples = " << c.tuples << '\n';
        else if (k == "tolerance") os << "tolerance = " << fmt(c.tolerance) << '\n';
        else if (k == "trim") os << "trim = " << fmt(c.trim) << '\n';
        else if (k == "conditioning_points") os << "conditioning_points = " << c.conditioning_points << '\n';
        else if (k == "source") os << "source = " << c.source << '\n';
        else if (k == "x_path" && !c.x_path.empty()) os << "x_path = " << c.x_path << '\n';
        else if (k == "y_path" && !c.y_path.empty()) os << "y_path = " << c.y_path << '\n';
    }
    auto section = [&](const char* name, const std::optional<DistributionSpec>& spec) {
        if (!spec || !has_key(info, name)) return;
        os << '[' << name << "]\n";
        const Record r = record_from_spec(*spec);
        os << "kind = " << r.at("kind") << '\n';
        for (const auto& [key, value] : r) {
            if (key != "kind") os << key << " = " << value << '\n';
        }
    };
    section("spec1", c.spec1);
    section("spec2", c.spec2);
    return os.str();
}

DistributionSpec parse_spec_expression(std::string_view text) {
    const std::string s = trim(text);
    const auto open = s.find('(');
    if (open == std::string::npos || s.back() != ')') {
        throw ConfigError("components", "expected kind(key=value, ...), got '" + s + "'");
    }
    Record record;
    record["kind"] = trim(std::string_view(s).substr(0, open));
    const std::string inner = s.substr(open + 1, s.size() - open - 2);
    if (!trim(inner).empty()) {
        for (const auto& item : split(inner, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw ConfigError("components", "expected key=value in '" + item + "'");
            record[trim(std::string_view(item).substr(0, eq))] = trim(std::string_view(item).substr(eq + 1));
        }
    }
    if (record["kind"] == "mixture") throw ConfigError("components", "nested mixtures are not supported inline");
    return spec_from_record("components", record);
}

std::string render_spec_expression(const DistributionSpec& spec) {
    const Record r = record_from_spec(spec);
    std::string out = r.at("kind") + "(";
    bool first = true;
    for (const auto& [key, value] : r) {
        if (key == "kind") continue;
        if (!first) out += ", ";
        out += key + "=" + value;
        first = false;
    }
    return out + ")";
}

}  // namespace klrlab
