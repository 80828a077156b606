#pragma once

// JSON and CSV conversions shared by the CLI and the Python bindings.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tempstable/estimation.hpp"
#include "tempstable/measures.hpp"
#include "tempstable/pricing.hpp"
#include "tempstable/tsdist.hpp"

namespace tempstable::io {

using nlohmann::json;

/// "%.10g"; the CSV number format.
std::string fmt10(double v);
/// v rounded to 10 significant digits, for JSON tables.
double round10(double v);

json to_json(const TsParams& p);
json to_json(const TsLaw& law);
json to_json(const Market& m);
json to_json(const MeasureSolution& s);
json to_json(const RawMoments& m);
json to_json(const MomCoefficients& c);

// Readers accept numbers or numeric strings; failures throw ParseError.
TsParams params_from_json(const json& j);
TsLaw law_from_json(const json& j);
Market market_from_json(const json& j);
MeasureSolution solution_from_json(const json& j);
RawMoments moments_from_json(const json& j);

json parse_json(std::string_view text);
json read_json_file(const std::string& path);
std::string read_text_file(const std::string& path);

struct PriceRow {
    std::string date;
    double close;
};

/// CSV with header `date,close`: ISO dates strictly increasing, closes > 0.
/// ParseError carries the 1-based line number of the offending row.
std::vector<PriceRow> parse_price_csv(std::string_view text);

/// One-column CSV of returns (any single header name).
std::vector<double> parse_return_csv(std::string_view text);

/// Whether the header line names a single column (a returns file).
bool is_single_column_csv(std::string_view text);

}  // namespace tempstable::io
