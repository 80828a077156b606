#include "tempstable/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "tempstable/errors.hpp"
#include "tempstable/estimation.hpp"
#include "tempstable/io.hpp"

namespace tempstable::cli {

namespace {

using io::fmt10;
using io::json;

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    threads = std::max(1u, threads);
    if (threads == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::min<std::size_t>(threads, n); ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

double parse_number(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw UsageError("invalid number '" + s + "' in " + what);
    }
    if (pos != s.size() || !std::isfinite(v)) throw UsageError("invalid number '" + s + "' in " + what);
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) parts.push_back(cur);
    if (!s.empty() && s.back() == sep) parts.emplace_back();
    return parts;
}

// "lo:hi:n" (n evenly spaced points, ends included) or "a,b,c".
std::vector<double> parse_grid(const std::string& spec, const std::string& what) {
    if (spec.empty()) throw UsageError("empty " + what + " list");
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        const auto parts = split(spec, ':');
        if (parts.size() != 3) throw UsageError(what + " must look like lo:hi:n");
        const double lo = parse_number(parts[0], what), hi = parse_number(parts[1], what);
        const double nd = parse_number(parts[2], what);
        if (!(nd >= 0.0) || nd != std::floor(nd)) throw UsageError(what + ": n must be a whole number");
        const auto n = static_cast<std::size_t>(nd);
        for (std::size_t i = 0; i < n; ++i) {
            out.push_back(n == 1 ? lo : i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / (n - 1));
        }
    } else {
        for (const auto& p : split(spec, ',')) out.push_back(parse_number(p, what));
    }
    if (out.empty()) throw UsageError("empty " + what + " list");
    return out;
}

json error_json(const Error& e) {
    json j{{"error", std::string(error_code_name(e.code()))}, {"message", e.what()}};
    if (const auto* fs = dynamic_cast<const NoFsMeasure*>(&e)) {
        j["c"] = fs->c();
        j["cond1_residual"] = fs->cond1_residual();
        j["cond2_residual"] = fs->cond2_residual();
    } else if (const auto* es = dynamic_cast<const NoEsscherMeasure*>(&e)) {
        j["reason"] = std::string(es->reason_name());
    } else if (const auto* ph = dynamic_cast<const PhysicalNotMartingale*>(&e)) {
        j["residual"] = ph->residual();
    } else if (const auto* ns = dynamic_cast<const NoSolution*>(&e)) {
        j["residuals"] = ns->residuals();
    } else if (const auto* pe = dynamic_cast<const ParseError*>(&e)) {
        if (pe->line() > 0) j["line"] = pe->line();
    }
    return j;
}

std::string csv_field(const std::optional<double>& v) { return v ? fmt10(*v) : std::string(); }

Market market_of(const RunConfig& cfg) {
    return Market::from_annual(cfg.annual_rate, cfg.dividend_rate, cfg.s0, cfg.days_per_year);
}

struct Context {
    RunConfig cfg;
    std::string format;  // empty: command default
    std::string out_path;
    std::ostream* out;
    std::ostream* err;

    void emit(const std::string& text) const {
        if (out_path.empty()) {
            *out << text;
            return;
        }
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw ParseError("cannot write '" + out_path + "'", 0);
        f << text;
    }

    bool json_output(const char* fallback) const { return (format.empty() ? fallback : format) == std::string("json"); }
};

// --- fit -------------------------------------------------------------------

json fit_report(const std::string& path, double beta) {
    const auto text = io::read_text_file(path);
    std::vector<double> returns;
    json j;
    if (io::is_single_column_csv(text)) {
        returns = io::parse_return_csv(text);
    } else {
        const auto rows = io::parse_price_csv(text);
        std::vector<double> closes;
        for (const auto& r : rows) closes.push_back(r.close);
        returns = log_returns(closes);
        if (!rows.empty()) {
            j["first_date"] = rows.front().date;
            j["last_date"] = rows.back().date;
        }
    }
    const auto sample = empirical_moments(std::move(returns));
    const auto coeffs = moment_coefficients(sample, beta);
    const auto normal = fit_normal(sample);
    const auto fit = mom_solve_detailed(coeffs, beta);
    j["n_returns"] = sample.returns.size();
    j["beta"] = beta;
    j["moments"] = io::to_json(sample.moments);
    j["coefficients"] = io::to_json(coeffs);
    j["params"] = io::to_json(fit.params);
    j["normal"] = {{"mu", normal.mu}, {"sigma", normal.sigma}};
    j["fit"] = {{"residuals", fit.residuals}, {"iterations", fit.iterations}, {"initial", io::to_json(fit.initial)}};
    return j;
}

std::string flatten_csv(const json& j) {
    std::string out = "field,value\n";
    std::function<void(const json&, const std::string&)> walk = [&](const json& v, const std::string& key) {
        if (v.is_object()) {
            for (auto it = v.begin(); it != v.end(); ++it) walk(it.value(), key.empty() ? it.key() : key + "." + it.key());
        } else if (v.is_array()) {
            for (std::size_t i = 0; i < v.size(); ++i) walk(v[i], key + "." + std::to_string(i + 1));
        } else if (v.is_number_float()) {
            out += key + "," + fmt10(v.get<double>()) + "\n";
        } else if (v.is_null()) {
            out += key + ",\n";
        } else if (v.is_string()) {
            out += key + "," + v.get<std::string>() + "\n";
        } else {
            out += key + "," + v.dump() + "\n";
        }
    };
    walk(j, "");
    return out;
}

// --- measure ---------------------------------------------------------------

struct ScanRow {
    double annual_rate;
    bool exists = false;
    std::optional<double> theta_plus, theta_minus, c, cond1, cond2;
    std::string status = "ok";
};

ScanRow scan_one(const TsParams& p, const RunConfig& cfg, double ra) {
    ScanRow row;
    row.annual_rate = ra;
    try {
        RunConfig local = cfg;
        local.annual_rate = ra;
        const auto mkt = market_of(local);
        if (cfg.measure.kind == MeasureKind::FsMinimal) {
            const double y = mkt.r - mkt.q, psi1 = cgf(p, 1.0);
            row.c = fs_constant(p, mkt);
            row.cond1 = psi1 - y;
            row.cond2 = psi1 - cgf(p, 2.0) + y;
        }
        const auto sol = solve_measure(p, mkt, cfg.measure);
        row.exists = true;
        row.theta_plus = sol.theta_plus;
        row.theta_minus = sol.theta_minus;
    } catch (const Error& e) {
        row.status = std::string(error_code_name(e.code()));
    }
    return row;
}

int cmd_measure(const Context& ctx, const std::string& params_path, const std::string& scan) {
    const auto p = io::params_from_json(io::read_json_file(params_path));
    if (!scan.empty()) {
        const auto rates = parse_grid(scan, "--scan-rates");
        std::vector<ScanRow> rows(rates.size());
        parallel_for(rates.size(), ctx.cfg.threads, [&](std::size_t i) { rows[i] = scan_one(p, ctx.cfg, rates[i]); });
        json bands = json::array();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (!rows[i].exists || (i > 0 && rows[i - 1].exists)) continue;
            std::size_t j = i;
            while (j + 1 < rows.size() && rows[j + 1].exists) ++j;
            bands.push_back({rows[i].annual_rate, rows[j].annual_rate});
        }
        if (ctx.json_output("csv")) {
            json arr = json::array();
            for (const auto& r : rows) {
                auto opt = [](const std::optional<double>& v) { return v ? json(io::round10(*v)) : json(nullptr); };
                arr.push_back({{"annual_rate", io::round10(r.annual_rate)}, {"exists", r.exists},
                               {"theta_plus", opt(r.theta_plus)}, {"theta_minus", opt(r.theta_minus)},
                               {"c", opt(r.c)}, {"cond1_residual", opt(r.cond1)},
                               {"cond2_residual", opt(r.cond2)}, {"status", r.status}});
            }
            ctx.emit(json{{"kind", std::string(to_string(ctx.cfg.measure.kind))}, {"rows", arr}, {"bands", bands}}
                         .dump(2) + "\n");
        } else {
            std::string out = "annual_rate,exists,theta_plus,theta_minus,c,cond1_residual,cond2_residual,status\n";
            for (const auto& r : rows) {
                out += fmt10(r.annual_rate) + "," + (r.exists ? "1" : "0") + "," + csv_field(r.theta_plus) + "," +
                       csv_field(r.theta_minus) + "," + csv_field(r.c) + "," + csv_field(r.cond1) + "," +
                       csv_field(r.cond2) + "," + r.status + "\n";
            }
            ctx.emit(out);
        }
        for (const auto& b : bands) {
            *ctx.err << "measure exists for annual rates in [" << fmt10(b[0].get<double>()) << ", "
                     << fmt10(b[1].get<double>()) << "]\n";
        }
        return kExitOk;
    }

    const auto mkt = market_of(ctx.cfg);
    try {
        auto j = io::to_json(solve_measure(p, mkt, ctx.cfg.measure));
        j["market"] = io::to_json(mkt);
        if (ctx.json_output("json")) {
            ctx.emit(j.dump(2) + "\n");
        } else {
            ctx.emit(flatten_csv(j));
        }
        return kExitOk;
    } catch (const Error& e) {
        auto j = error_json(e);
        j["kind"] = std::string(to_string(ctx.cfg.measure.kind));
        ctx.emit(ctx.json_output("json") ? j.dump(2) + "\n" : flatten_csv(j));
        *ctx.err << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
        return exit_code_for(e);
    }
}

// --- price -----------------------------------------------------------------

TsLaw pricing_law(const Context& ctx, const std::string& solution_path, const std::string& params_path,
                  std::optional<double>& sigma) {
    if (!solution_path.empty()) return io::solution_from_json(io::read_json_file(solution_path)).law_per_day;
    const auto j = io::read_json_file(params_path);
    if (!sigma && j.contains("normal") && j.at("normal").contains("sigma")) {
        sigma = j.at("normal").at("sigma").get<double>();
    }
    return solve_measure(io::params_from_json(j), market_of(ctx.cfg), ctx.cfg.measure).law_per_day;
}

std::string surface_csv(const std::vector<SurfaceCell>& cells, const Market& mkt, std::optional<double> bs_sigma) {
    std::string out = "strike,maturity_days,price,implied_vol,status";
    out += bs_sigma ? ",bs_diff\n" : "\n";
    for (const auto& c : cells) {
        out += fmt10(c.strike) + "," + fmt10(c.maturity) + "," + csv_field(c.price) + "," +
               csv_field(c.implied_vol) + "," + c.status;
        if (bs_sigma) {
            std::optional<double> diff;
            if (c.price) diff = *c.price - price_black_scholes(mkt, {c.strike, c.maturity}, *bs_sigma);
            out += "," + csv_field(diff);
        }
        out += "\n";
    }
    return out;
}

json surface_json(const std::vector<SurfaceCell>& cells, const Market& mkt, std::optional<double> bs_sigma) {
    json arr = json::array();
    auto opt = [](const std::optional<double>& v) { return v ? json(io::round10(*v)) : json(nullptr); };
    for (const auto& c : cells) {
        json row{{"strike", io::round10(c.strike)}, {"maturity_days", io::round10(c.maturity)},
                 {"price", opt(c.price)}, {"implied_vol", opt(c.implied_vol)}, {"status", c.status}};
        if (!c.message.empty()) row["message"] = c.message;
        if (bs_sigma) {
            std::optional<double> diff;
            if (c.price) diff = *c.price - price_black_scholes(mkt, {c.strike, c.maturity}, *bs_sigma);
            row["bs_diff"] = opt(diff);
        }
        arr.push_back(row);
    }
    return arr;
}

int cmd_price(const Context& ctx, const std::string& solution_path, const std::string& params_path,
              const std::string& strikes_spec, const std::string& maturities_spec, bool bs_diff,
              std::optional<double> sigma) {
    if (solution_path.empty() == params_path.empty()) throw UsageError("give exactly one of --solution or --params");
    const auto strikes = parse_grid(strikes_spec, "--strikes");
    const auto maturities = parse_grid(maturities_spec, "--maturities");
    const auto mkt = market_of(ctx.cfg);
    const auto law = pricing_law(ctx, solution_path, params_path, sigma);
    if (bs_diff && !sigma) throw UsageError("--bs-diff needs --sigma or a fit report passed as --params");
    const auto cells = surface(law, mkt, strikes, maturities, ctx.cfg.contour, ctx.cfg.threads);
    std::optional<double> bs;
    if (bs_diff) bs = sigma;
    ctx.emit(ctx.json_output("csv") ? surface_json(cells, mkt, bs).dump(2) + "\n" : surface_csv(cells, mkt, bs));
    return kExitOk;
}

// --- stability -------------------------------------------------------------

struct StabilityCell {
    double mu, sigma;
    std::optional<TsParams> params;
    std::optional<double> theta_plus, theta_minus, price;
    std::string status = "ok";
};

int cmd_stability(const Context& ctx, const std::string& params_path, const std::string& moments_spec,
                  const std::string& mu_spec, const std::string& sigma_spec, double strike, double maturity) {
    RawMoments base;
    double beta = ctx.cfg.beta;
    if (!moments_spec.empty()) {
        const auto m = parse_grid(moments_spec, "--moments");
        if (m.size() != 4) throw UsageError("--moments needs m1,m2,m3,m4");
        base = {m[0], m[1], m[2], m[3]};
    } else if (!params_path.empty()) {
        const auto j = io::read_json_file(params_path);
        base = io::moments_from_json(j);
        if (j.contains("beta")) beta = j.at("beta").get<double>();
    } else {
        throw UsageError("stability needs --params <fit report> or --moments m1,m2,m3,m4");
    }
    const auto base_fit = fit_normal(base);
    const auto mus = parse_grid(mu_spec, "--mu-grid");
    const auto sigmas = parse_grid(sigma_spec, "--sigma-grid");
    const auto mkt = market_of(ctx.cfg);
    const OptionSpec opt{strike, maturity};

    std::vector<StabilityCell> cells;
    for (double mu : mus)
        for (double s : sigmas) cells.push_back({mu, s, std::nullopt, std::nullopt, std::nullopt, std::nullopt, "ok"});

    auto near = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(b), 1e-300); };
    parallel_for(cells.size(), ctx.cfg.threads, [&](std::size_t i) {
        auto& cell = cells[i];
        try {
            RawMoments m = base;
            // Cells at the base values reuse the base moments bit for bit.
            if (!(near(cell.mu, base_fit.mu) && near(cell.sigma, base_fit.sigma))) {
                m.m1 = cell.mu;
                m.m2 = cell.sigma * cell.sigma + cell.mu * cell.mu;
            }
            const auto p = mom_solve(moment_coefficients(m, beta), beta);
            cell.params = p;
            const auto sol = solve_measure(p, mkt, ctx.cfg.measure);
            cell.theta_plus = sol.theta_plus;
            cell.theta_minus = sol.theta_minus;
            cell.price = price_fourier(sol.law_per_day.scaled(maturity), mkt, opt, ctx.cfg.contour);
        } catch (const Error& e) {
            cell.status = std::string(error_code_name(e.code()));
        }
    });

    auto param = [](const StabilityCell& c, double TsParams::*field) -> std::optional<double> {
        if (!c.params) return std::nullopt;
        return (*c.params).*field;
    };
    if (ctx.json_output("csv")) {
        json arr = json::array();
        auto opt_json = [](const std::optional<double>& v) { return v ? json(io::round10(*v)) : json(nullptr); };
        for (const auto& c : cells) {
            arr.push_back({{"mu", io::round10(c.mu)}, {"sigma", io::round10(c.sigma)},
                           {"alpha_plus", opt_json(param(c, &TsParams::alpha_plus))},
                           {"alpha_minus", opt_json(param(c, &TsParams::alpha_minus))},
                           {"lambda_plus", opt_json(param(c, &TsParams::lambda_plus))},
                           {"lambda_minus", opt_json(param(c, &TsParams::lambda_minus))},
                           {"theta_plus", opt_json(c.theta_plus)}, {"theta_minus", opt_json(c.theta_minus)},
                           {"price", opt_json(c.price)}, {"status", c.status}});
        }
        ctx.emit(arr.dump(2) + "\n");
    } else {
        std::string out = "mu,sigma,alpha_plus,alpha_minus,lambda_plus,lambda_minus,theta_plus,theta_minus,price,status\n";
        for (const auto& c : cells) {
            out += fmt10(c.mu) + "," + fmt10(c.sigma) + "," + csv_field(param(c, &TsParams::alpha_plus)) + "," +
                   csv_field(param(c, &TsParams::alpha_minus)) + "," + csv_field(param(c, &TsParams::lambda_plus)) +
                   "," + csv_field(param(c, &TsParams::lambda_minus)) + "," + csv_field(c.theta_plus) + "," +
                   csv_field(c.theta_minus) + "," + csv_field(c.price) + "," + c.status + "\n";
        }
        ctx.emit(out);
    }
    return kExitOk;
}

}  // namespace

RunConfig load_config(const std::string& text) {
    const auto j = io::parse_json(text);
    if (!j.is_object()) throw ParseError("config must be a JSON object", 0);
    RunConfig cfg;
    auto num = [](const json& v, const std::string& key) {
        if (!v.is_number()) throw ParseError("config field '" + key + "' must be a number", 0);
        return v.get<double>();
    };
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& key = it.key();
        const auto& v = it.value();
        if (key == "beta") cfg.beta = num(v, key);
        else if (key == "annual_rate") cfg.annual_rate = num(v, key);
        else if (key == "dividend_rate") cfg.dividend_rate = num(v, key);
        else if (key == "days_per_year") cfg.days_per_year = static_cast<int>(num(v, key));
        else if (key == "s0") cfg.s0 = num(v, key);
        else if (key == "threads") cfg.threads = static_cast<unsigned>(std::max(1.0, num(v, key)));
        else if (key == "measure") {
            if (!v.is_object()) throw ParseError("config field 'measure' must be an object", 0);
            for (auto m = v.begin(); m != v.end(); ++m) {
                if (m.key() == "kind" && m.value().is_string()) {
                    try {
                        cfg.measure.kind = parse_measure_kind(m.value().get<std::string>());
                    } catch (const UsageError& e) {
                        throw ParseError(e.what(), 0);
                    }
                } else if (m.key() == "p") {
                    cfg.measure.p = num(m.value(), "measure.p");
                } else {
                    throw ParseError("unknown config field 'measure." + m.key() + "'", 0);
                }
            }
        } else if (key == "contour") {
            if (!v.is_object()) throw ParseError("config field 'contour' must be an object", 0);
            for (auto c = v.begin(); c != v.end(); ++c) {
                if (c.key() == "nu") cfg.contour.nu = num(c.value(), "contour.nu");
                else if (c.key() == "truncation") cfg.contour.truncation = num(c.value(), "contour.truncation");
                else if (c.key() == "max_evals")
                    cfg.contour.max_evals = static_cast<std::size_t>(num(c.value(), "contour.max_evals"));
                else throw ParseError("unknown config field 'contour." + c.key() + "'", 0);
            }
        } else {
            throw ParseError("unknown config field '" + key + "'", 0);
        }
    }
    return cfg;
}

int exit_code_for(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        switch (err->code()) {
            case ErrorCode::Usage: return kExitUsage;
            case ErrorCode::Parse:
            case ErrorCode::TooFewObservations:
            case ErrorCode::DegenerateSample: return kExitData;
            default: return kExitNumeric;
        }
    }
    if (dynamic_cast<const CLI::Error*>(&e)) return kExitUsage;
    return kExitNumeric;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exponential tempered stable models: fitting, martingale measures and option pricing",
                 "tempstable"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_path, format;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", out_path, "write output to this file instead of stdout");
    app.add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));

    double beta = 0.1, rate = 0.01, dividend = 0.0, s0 = 7500.0, p = 2.0, nu = 0.0, truncation = 0.0;
    int days = 255;
    unsigned threads = 1;
    std::string kind;
    auto* o_beta = app.add_option("--beta", beta, "stability index used by the moment fit");
    auto* o_rate = app.add_option("--rate", rate, "annual riskless rate");
    auto* o_div = app.add_option("--dividend", dividend, "annual dividend rate");
    auto* o_days = app.add_option("--days-per-year", days, "trading days per year");
    auto* o_s0 = app.add_option("--s0", s0, "spot price");
    auto* o_threads = app.add_option("--threads", threads, "worker threads for grid commands");
    auto* o_kind = app.add_option("--kind", kind, "martingale measure")
                       ->check(CLI::IsMember({"physical", "esscher", "min-entropy", "p-optimal", "fs"}));
    auto* o_p = app.add_option("--p", p, "exponent of the p-optimal measure");
    auto* o_nu = app.add_option("--nu", nu, "contour height (default: automatic)");
    auto* o_trunc = app.add_option("--truncation", truncation, "contour truncation (default: automatic)");

    auto* fit = app.add_subcommand("fit", "method-of-moments fit from a price or return CSV");
    std::string input;
    fit->add_option("input", input, "CSV with header date,close (or a one-column return file)")->required();

    auto* measure = app.add_subcommand("measure", "solve a martingale measure for fitted parameters");
    std::string params_path, scan;
    measure->add_option("--params", params_path, "parameter JSON or fit report")->required();
    measure->add_option("--scan-rates", scan, "scan annual rates lo:hi:n and report existence");

    auto* price = app.add_subcommand("price", "call prices and implied volatilities on a strike/maturity grid");
    std::string solution_path, price_params, strikes, maturities;
    bool bs_diff = false;
    double sigma = 0.0;
    price->add_option("--solution", solution_path, "measure JSON written by 'measure'");
    price->add_option("--params", price_params, "parameter JSON or fit report; the measure is solved first");
    price->add_option("--strikes", strikes, "lo:hi:n or comma list")->required();
    price->add_option("--maturities", maturities, "trading days, comma list or lo:hi:n")->required();
    price->add_flag("--bs-diff", bs_diff, "add the difference to Black-Scholes prices");
    auto* o_sigma = price->add_option("--sigma", sigma, "Black-Scholes volatility per sqrt(day) for --bs-diff");

    auto* stability = app.add_subcommand("stability", "prices under perturbed first two moments");
    std::string stab_params, moments, mu_grid = "-0.0008:0.0012:5", sigma_grid = "0.0150:0.0153:5";
    double strike = 7700.0, maturity = 10.0;
    stability->add_option("--params", stab_params, "fit report (supplies m1..m4 and beta)");
    stability->add_option("--moments", moments, "base moments m1,m2,m3,m4");
    stability->add_option("--mu-grid", mu_grid, "lo:hi:n or list")->capture_default_str();
    stability->add_option("--sigma-grid", sigma_grid, "lo:hi:n or list")->capture_default_str();
    stability->add_option("--strike", strike, "strike")->capture_default_str();
    stability->add_option("--maturity", maturity, "maturity in trading days")->capture_default_str();

    std::vector<std::string> argv_store{"tempstable"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        Context ctx{config_path.empty() ? RunConfig{} : load_config(io::read_text_file(config_path)), format,
                    out_path, &out, &err};
        auto& cfg = ctx.cfg;
        if (o_beta->count()) cfg.beta = beta;
        if (o_rate->count()) cfg.annual_rate = rate;
        if (o_div->count()) cfg.dividend_rate = dividend;
        if (o_days->count()) cfg.days_per_year = days;
        if (o_s0->count()) cfg.s0 = s0;
        if (o_threads->count()) cfg.threads = threads;
        if (o_kind->count()) cfg.measure.kind = parse_measure_kind(kind);
        if (o_p->count()) cfg.measure.p = p;
        if (o_nu->count()) cfg.contour.nu = nu;
        if (o_trunc->count()) cfg.contour.truncation = truncation;

        if (*fit) {
            const auto report = fit_report(input, cfg.beta);
            ctx.emit(ctx.json_output("json") ? report.dump(2) + "\n" : flatten_csv(report));
            return kExitOk;
        }
        if (*measure) return cmd_measure(ctx, params_path, scan);
        if (*price) {
            return cmd_price(ctx, solution_path, price_params, strikes, maturities, bs_diff,
                             o_sigma->count() ? std::optional<double>(sigma) : std::nullopt);
        }
        if (*stability) return cmd_stability(ctx, stab_params, moments, mu_grid, sigma_grid, strike, maturity);
    } catch (const Error& e) {
        err << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitUsage;
}

}  // namespace tempstable::cli
