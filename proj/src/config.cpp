#include "mabm/config.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <stdexcept>

#include "mabm/csv.hpp"

namespace mabm {

namespace {

struct KeyInfo {
    std::string_view key;
    std::string_view section;
};

constexpr KeyInfo kKeys[] = {
    {"n", "herding"},           {"beta", "herding"},     {"beta_n", "herding"},
    {"epsilon", "herding"},     {"r", "herding"},        {"k1", "herding"},
    {"k2", "herding"},          {"delta", "herding"},    {"gamma", "pricing"},
    {"b", "pricing"},           {"m", "pricing"},        {"sigma", "pricing"},
    {"p_f", "pricing"},         {"price_terms", "market"}, {"heterogeneous", "market"},
    {"m_min", "market"},        {"m_max", "market"},     {"b_min", "market"},
    {"b_max", "market"},        {"exp_cap", "market"},   {"initial_chartists", "market"},
    {"n_pool", "soi"},          {"n0", "soi"},           {"window", "soi"},
    {"threshold", "soi"},       {"p_enter", "soi"},      {"p_exit", "soi"},
};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

const KeyInfo* find_key(std::string_view key) {
    for (const auto& k : kKeys)
        if (k.key == key) return &k;
    return nullptr;
}

std::string key_list() {
    std::string out;
    for (const auto& k : kKeys) {
        if (!out.empty()) out += ", ";
        out += k.key;
    }
    return out;
}

class Reader {
public:
    explicit Reader(const ConfigDocument& doc) : doc_(doc) {}

    bool has(const std::string& key) const { return doc_.count(key) != 0; }

    double number(const std::string& key, double fallback) const {
        auto it = doc_.find(key);
        if (it == doc_.end()) return fallback;
        const std::string& s = it->second;
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size())
            throw std::invalid_argument("config: " + key + " must be a number, got '" + s + "'");
        return v;
    }

    int integer(const std::string& key, int fallback) const {
        auto it = doc_.find(key);
        if (it == doc_.end()) return fallback;
        const std::string& s = it->second;
        int v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size())
            throw std::invalid_argument("config: " + key + " must be an integer, got '" + s + "'");
        return v;
    }

    bool flag(const std::string& key, bool fallback) const {
        auto it = doc_.find(key);
        if (it == doc_.end()) return fallback;
        std::string s = it->second;
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
        if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
        if (s == "false" || s == "0" || s == "no" || s == "off") return false;
        throw std::invalid_argument("config: " + key + " must be true or false, got '" + it->second + "'");
    }

private:
    const ConfigDocument& doc_;
};

}  // namespace

const std::vector<std::string>& valid_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> v;
        for (const auto& k : kKeys) v.emplace_back(k.key);
        return v;
    }();
    return keys;
}

ConfigDocument parse_document(std::string_view text) {
    ConfigDocument doc;
    std::string section;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto stop = text.find('\n', start);
        if (stop == std::string_view::npos) stop = text.size();
        std::string_view line = text.substr(start, stop - start);
        start = stop + 1;
        ++line_no;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string_view::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = "config line " + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw std::invalid_argument(where + "unterminated section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (section != "herding" && section != "pricing" && section != "market" && section != "soi")
                throw std::invalid_argument(where + "unknown section '" + section +
                                            "' (valid: herding, pricing, market, soi)");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw std::invalid_argument(where + "expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        const KeyInfo* info = find_key(key);
        if (!info)
            throw std::invalid_argument(where + "unknown key '" + key + "' (valid keys: " + key_list() + ")");
        if (!section.empty() && info->section != section)
            throw std::invalid_argument(where + "key '" + key + "' belongs to section [" +
                                        std::string(info->section) + "]");
        if (value.empty()) throw std::invalid_argument(where + "empty value for '" + key + "'");
        if (!doc.emplace(key, value).second)
            throw std::invalid_argument(where + "duplicate key '" + key + "'");
        if (stop == text.size()) break;
    }
    return doc;
}

Config resolve(const ConfigDocument& doc) {
    for (const auto& [key, value] : doc)
        if (!find_key(key))
            throw std::invalid_argument("config: unknown key '" + key + "' (valid keys: " + key_list() + ")");
    const Reader in(doc);

    const int n = in.integer("n", 500);
    if (n < 1) throw std::invalid_argument("config: n >= 1 required");
    if (in.has("beta") && in.has("beta_n"))
        throw std::invalid_argument("config: beta and beta_n are mutually exclusive");
    const double beta = in.has("beta") ? in.number("beta", 0.0) : in.number("beta_n", 0.02) / n;

    const bool has_k = in.has("k1") || in.has("k2");
    const int forms = static_cast<int>(in.has("epsilon")) + static_cast<int>(in.has("r")) +
                      static_cast<int>(has_k);
    if (forms > 1) throw std::invalid_argument("config: give only one of epsilon, r, or k1/k2");
    const double delta = in.number("delta", 0.003);

    std::optional<HerdingParams> herding;
    if (has_k) {
        const double k1 = in.number("k1", in.number("k2", 0.0));
        const double k2 = in.number("k2", k1);
        herding.emplace(n, beta, k1, k2, delta, std::nullopt, RateBound::PerAgent);
    } else if (in.has("r")) {
        herding = HerdingParams::with_ratio(n, beta, in.number("r", 0.5), delta, RateBound::PerAgent);
    } else {
        const double eps = in.number("epsilon", 0.5);
        if (!(eps > 0.0)) throw std::invalid_argument("config: epsilon > 0 required");
        const double k = eps / n;
        std::optional<double> r;
        if (eps < 1.0) r = eps;
        herding.emplace(n, beta, k, k, delta, r, RateBound::PerAgent);
    }

    Config c{*herding, MarketConfig{}, SoiConfig{}};
    PricingParams& p = c.market.pricing;
    p.gamma = in.number("gamma", p.gamma);
    p.b = in.number("b", p.b);
    p.m = in.integer("m", p.m);
    p.sigma = in.number("sigma", p.sigma);
    p.p_f = in.number("p_f", p.p_f);

    c.market.herding = c.herding;
    c.market.use_price_terms = in.flag("price_terms", true);
    if (in.flag("heterogeneous", true)) {
        Heterogeneity h;
        h.m_min = in.integer("m_min", h.m_min);
        h.m_max = in.integer("m_max", h.m_max);
        h.b_min = in.number("b_min", h.b_min);
        h.b_max = in.number("b_max", h.b_max);
        c.market.heterogeneity = h;
    } else {
        for (const char* k : {"m_min", "m_max", "b_min", "b_max"})
            if (in.has(k))
                throw std::invalid_argument(std::string("config: ") + k + " requires heterogeneous = true");
        c.market.heterogeneity.reset();
    }
    c.market.exp_cap = in.number("exp_cap", c.market.exp_cap);
    c.market.initial_chartists = in.integer("initial_chartists", 0);
    c.market.validate();

    SoiConfig& s = c.soi;
    s.n_pool = in.integer("n_pool", s.n_pool);
    s.n0 = in.integer("n0", s.n0);
    s.window = in.integer("window", s.window);
    s.threshold = in.number("threshold", s.threshold);
    s.p_enter = in.number("p_enter", s.p_enter);
    s.p_exit = in.number("p_exit", s.p_exit);
    s.validate();
    return c;
}

std::string describe(const Config& c) {
    std::ostringstream out;
    const auto& h = c.herding;
    const auto& p = c.market.pricing;
    out << "n = " << h.n_agents() << '\n'
        << "beta = " << format_double(h.beta()) << '\n'
        << "beta_n = " << format_double(h.beta() * h.n_agents()) << '\n'
        << "k1 = " << format_double(h.k1()) << '\n'
        << "k2 = " << format_double(h.k2()) << '\n'
        << "epsilon = " << format_double(h.epsilon()) << '\n'
        << "r = " << (h.r() ? format_double(*h.r()) : std::string("none")) << '\n'
        << "delta = " << format_double(h.delta()) << '\n'
        << "stationary_mode = " << (h.epsilon() > 0.0 ? to_string(stationary_modality(h.epsilon())) : "absorbing") << '\n'
        << "gamma = " << format_double(p.gamma) << '\n'
        << "b = " << format_double(p.b) << '\n'
        << "m = " << p.m << '\n'
        << "sigma = " << format_double(p.sigma) << '\n'
        << "p_f = " << format_double(p.p_f) << '\n'
        << "price_terms = " << (c.market.use_price_terms ? "true" : "false") << '\n'
        << "heterogeneous = " << (c.market.heterogeneity ? "true" : "false") << '\n';
    if (c.market.heterogeneity) {
        const auto& het = *c.market.heterogeneity;
        out << "m_min = " << het.m_min << '\n'
            << "m_max = " << het.m_max << '\n'
            << "b_min = " << format_double(het.b_min) << '\n'
            << "b_max = " << format_double(het.b_max) << '\n';
    }
    out << "exp_cap = " << format_double(c.market.exp_cap) << '\n'
        << "initial_chartists = " << c.market.initial_chartists << '\n'
        << "n_pool = " << c.soi.n_pool << '\n'
        << "n0 = " << c.soi.n0 << '\n'
        << "window = " << c.soi.window << '\n'
        << "threshold = " << format_double(c.soi.threshold) << '\n'
        << "p_enter = " << format_double(c.soi.p_enter) << '\n'
        << "p_exit = " << format_double(c.soi.p_exit) << '\n';
    return out.str();
}

}  // namespace mabm
