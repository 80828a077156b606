#include "tempstable/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "tempstable/errors.hpp"

namespace tempstable::io {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

double number(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field '") + key + "'", 0);
    const auto& v = j.at(key);
    if (v.is_number()) return v.get<double>();
    double out = 0.0;
    if (v.is_string() && parse_double(v.get<std::string>(), out)) return out;
    throw ParseError(std::string("field '") + key + "' is not a number", 0);
}

std::optional<double> optional_number(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return number(j, key);
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = end + 1;
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    return lines;
}

bool is_iso_date(std::string_view s) {
    if (s.size() < 10) return false;
    for (int i : {0, 1, 2, 3, 5, 6, 8, 9}) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    if (s[4] != '-' || s[7] != '-') return false;
    const int month = (s[5] - '0') * 10 + (s[6] - '0');
    const int day = (s[8] - '0') * 10 + (s[9] - '0');
    if (month < 1 || month > 12 || day < 1 || day > 31) return false;
    return s.size() == 10 || s[10] == 'T' || s[10] == ' ';
}

std::string line_prefix(std::size_t line) { return "line " + std::to_string(line) + ": "; }

}  // namespace

std::string fmt10(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

double round10(double v) {
    if (!std::isfinite(v)) return v;
    return std::strtod(fmt10(v).c_str(), nullptr);
}

json to_json(const TsParams& p) {
    return {{"alpha_plus", p.alpha_plus},   {"beta_plus", p.beta_plus},   {"lambda_plus", p.lambda_plus},
            {"alpha_minus", p.alpha_minus}, {"beta_minus", p.beta_minus}, {"lambda_minus", p.lambda_minus}};
}

json to_json(const TsLaw& law) {
    if (law.single()) {
        auto j = to_json(law.components().front().params);
        j["time_scale"] = law.components().front().time_scale;
        return j;
    }
    json parts = json::array();
    for (const auto& c : law.components()) {
        auto j = to_json(c.params);
        j["time_scale"] = c.time_scale;
        parts.push_back(j);
    }
    return {{"components", parts}};
}

json to_json(const Market& m) {
    return {{"r", m.r}, {"q", m.q}, {"s0", m.s0}, {"days_per_year", m.days_per_year}};
}

json to_json(const MeasureSolution& s) {
    json j;
    j["kind"] = std::string(to_string(s.spec.kind));
    if (s.spec.kind == MeasureKind::POptimalBilateral) j["p"] = s.spec.p;
    j["theta_plus"] = optional_json(s.theta_plus);
    j["theta_minus"] = optional_json(s.theta_minus);
    j["c"] = optional_json(s.c);
    j["law"] = to_json(s.law_per_day);
    j["diagnostics"] = {{"residual", s.diagnostics.residual},
                        {"iterations", s.diagnostics.iterations},
                        {"objective_value", optional_json(s.diagnostics.objective_value)},
                        {"grid_ties", s.diagnostics.grid_ties}};
    return j;
}

json to_json(const RawMoments& m) { return {{"m1", m.m1}, {"m2", m.m2}, {"m3", m.m3}, {"m4", m.m4}}; }

json to_json(const MomCoefficients& c) { return {{"c1", c.c1}, {"c2", c.c2}, {"c3", c.c3}, {"c4", c.c4}}; }

TsParams params_from_json(const json& j) {
    if (j.is_object() && j.contains("params")) return params_from_json(j.at("params"));
    TsParams p{number(j, "alpha_plus"),  number(j, "beta_plus"),  number(j, "lambda_plus"),
               number(j, "alpha_minus"), number(j, "beta_minus"), number(j, "lambda_minus")};
    try {
        validate(p);
    } catch (const DomainError& e) {
        throw ParseError(std::string("invalid parameters: ") + e.what(), 0);
    }
    return p;
}

TsLaw law_from_json(const json& j) {
    std::vector<LawComponent> parts;
    auto one = [&](const json& c) {
        const auto t = optional_number(c, "time_scale");
        parts.push_back({params_from_json(c), t.value_or(1.0)});
    };
    if (j.is_object() && j.contains("components")) {
        if (!j.at("components").is_array()) throw ParseError("'components' must be an array", 0);
        for (const auto& c : j.at("components")) one(c);
    } else {
        one(j);
    }
    try {
        return TsLaw(std::move(parts));
    } catch (const DomainError& e) {
        throw ParseError(std::string("invalid law: ") + e.what(), 0);
    }
}

Market market_from_json(const json& j) {
    Market m{number(j, "r"), number(j, "q"), number(j, "s0"), 255};
    if (const auto d = optional_number(j, "days_per_year")) m.days_per_year = static_cast<int>(*d);
    try {
        validate(m);
    } catch (const DomainError& e) {
        throw ParseError(std::string("invalid market: ") + e.what(), 0);
    }
    return m;
}

MeasureSolution solution_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw ParseError("measure solution needs a 'kind' string", 0);
    if (!j.contains("law")) throw ParseError("measure solution needs a 'law'", 0);
    MeasureSpec spec;
    try {
        spec.kind = parse_measure_kind(j.at("kind").get<std::string>());
    } catch (const UsageError& e) {
        throw ParseError(e.what(), 0);
    }
    if (const auto p = optional_number(j, "p")) spec.p = *p;
    MeasureSolution s{spec, optional_number(j, "theta_plus"), optional_number(j, "theta_minus"),
                      optional_number(j, "c"), law_from_json(j.at("law")), {}};
    if (j.contains("diagnostics") && j.at("diagnostics").is_object()) {
        const auto& d = j.at("diagnostics");
        s.diagnostics.residual = optional_number(d, "residual").value_or(0.0);
        s.diagnostics.iterations = static_cast<int>(optional_number(d, "iterations").value_or(0.0));
        s.diagnostics.objective_value = optional_number(d, "objective_value");
        s.diagnostics.grid_ties = static_cast<int>(optional_number(d, "grid_ties").value_or(0.0));
    }
    return s;
}

RawMoments moments_from_json(const json& j) {
    if (j.is_object() && j.contains("moments")) return moments_from_json(j.at("moments"));
    return {number(j, "m1"), number(j, "m2"), number(j, "m3"), number(j, "m4")};
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), 0);
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'", 0);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json_file(const std::string& path) { return parse_json(read_text_file(path)); }

std::vector<PriceRow> parse_price_csv(std::string_view text) {
    const auto lines = split_lines(text);
    if (lines.empty()) throw ParseError("line 1: empty file, expected header 'date,close'", 1);
    if (trim(lines[0]) != "date,close") {
        throw ParseError("line 1: expected header 'date,close', got '" + std::string(lines[0]) + "'", 1);
    }
    std::vector<PriceRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        const auto line = lines[i];
        if (trim(line).empty()) throw ParseError(line_prefix(lineno) + "empty row", lineno);
        const auto comma = line.find(',');
        if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
            throw ParseError(line_prefix(lineno) + "expected two fields 'date,close'", lineno);
        }
        const auto date = trim(line.substr(0, comma));
        if (!is_iso_date(date)) {
            throw ParseError(line_prefix(lineno) + "'" + std::string(date) + "' is not an ISO-8601 date", lineno);
        }
        double close = 0.0;
        if (!parse_double(line.substr(comma + 1), close) || !(close > 0.0)) {
            throw ParseError(line_prefix(lineno) + "close must be a positive number", lineno);
        }
        if (!rows.empty()) {
            if (date == rows.back().date)
                throw ParseError(line_prefix(lineno) + "duplicate date " + std::string(date), lineno);
            if (date < rows.back().date)
                throw ParseError(line_prefix(lineno) + "dates are not increasing at " + std::string(date), lineno);
        }
        rows.push_back({std::string(date), close});
    }
    return rows;
}

bool is_single_column_csv(std::string_view text) {
    const auto lines = split_lines(text);
    return !lines.empty() && lines[0].find(',') == std::string_view::npos;
}

std::vector<double> parse_return_csv(std::string_view text) {
    const auto lines = split_lines(text);
    if (lines.empty() || trim(lines[0]).empty()) throw ParseError("line 1: missing header", 1);
    std::vector<double> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        double x = 0.0;
        if (!parse_double(lines[i], x)) {
            throw ParseError(line_prefix(i + 1) + "'" + std::string(lines[i]) + "' is not a number", i + 1);
        }
        out.push_back(x);
    }
    return out;
}

}  // namespace tempstable::io
