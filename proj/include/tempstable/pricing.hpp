#pragma once

// European call pricing in the exponential tempered stable model: contour
// (Fourier) integral, closed form through the distribution function, the
// Black-Scholes reference and implied volatility. Times are trading days.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tempstable/measures.hpp"
#include "tempstable/tsdist.hpp"

namespace tempstable {

struct OptionSpec {
    double strike = 1.0;
    double maturity = 1.0;  // trading days
};

void validate(const OptionSpec& opt);

struct ContourConfig {
    std::optional<double> nu;          // imaginary part of the contour; auto when empty
    std::optional<double> truncation;  // integrate u in [-U, U]; auto when empty
    std::size_t max_evals = 200000;
};

struct PriceResult {
    double price = 0.0;
    double imag_residual = 0.0;  // |Im| of the contour integral in price units
    double nu = 0.0;
    double truncation = 0.0;
    std::size_t evals = 0;
};

/// Admissible open interval (1, lambda_plus_min) for the call contour.
/// Throws ContourViolation when it is empty (lambda_plus_min <= 1).
std::pair<double, double> contour_band(const TsLaw& law_T);

/// Contour picked when ContourConfig::nu is empty: minimizes the integrand
/// modulus at u = 0 over the inner part of the band.
double auto_contour(const TsLaw& law_T, const Market& mkt, const OptionSpec& opt);

/// Call price; law_T is the law of X_T under the pricing measure.
double price_fourier(const TsLaw& law_T, const Market& mkt, const OptionSpec& opt,
                     const ContourConfig& cfg = {});
PriceResult price_fourier_detailed(const TsLaw& law_T, const Market& mkt, const OptionSpec& opt,
                                   const ContourConfig& cfg = {});

/// Evaluates the contour integral at a given nu without the call band check.
/// With nu in (-lambda_minus_min, 0) the same integral prices the put.
PriceResult contour_price(const TsLaw& law_T, const Market& mkt, const OptionSpec& opt, double nu,
                          const ContourConfig& cfg = {});

/// S0 e^{(Psi(1) - r)T} Fbar_1(k) - e^{-rT} K Fbar_0(k), k = ln(K / S0), where
/// Fbar_0 is the survival function of X_T and Fbar_1 that of its Esscher tilt by 1.
double price_closed_form(const TsLaw& law_per_day, const Market& mkt, const OptionSpec& opt,
                         const InversionConfig& cfg = {});

/// sigma is per square root of a trading day.
double price_black_scholes(const Market& mkt, const OptionSpec& opt, double sigma);
/// Throws PriceOutOfBand outside (max(S0 e^{-qT} - K e^{-rT}, 0), S0 e^{-qT}).
double implied_vol(const Market& mkt, const OptionSpec& opt, double price);

struct SurfaceCell {
    double strike = 0.0;
    double maturity = 0.0;
    std::optional<double> price;
    std::optional<double> implied_vol;
    std::string status = "ok";  // "ok" or the name of the error that hit this cell
    std::string message;
};

/// Row-major over maturities, then strikes. Errors are recorded per cell.
std::vector<SurfaceCell> surface(const TsLaw& law_per_day, const Market& mkt,
                                 std::span<const double> strikes, std::span<const double> maturities,
                                 const ContourConfig& cfg = {}, unsigned threads = 1);

}  // namespace tempstable
