#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "volharness/calendar.hpp"

namespace volharness {

enum class AssetClass { Crypto, Equity };

const char* to_string(AssetClass ac);
AssetClass parse_asset_class(std::string_view text);

struct PricePoint {
    EpochSeconds timestamp = 0;
    double price = 0.0;
};

/// Observed prices for one symbol, sorted by timestamp with no duplicates.
struct PriceSeries {
    std::string symbol;
    AssetClass asset_class = AssetClass::Crypto;
    std::vector<PricePoint> points;
};

struct LoadedPrices {
    std::vector<PriceSeries> series;  // one per symbol, ordered by symbol
    std::size_t duplicate_count = 0;  // rows replaced by a later row with the same key
};

/// Reads a `timestamp,symbol,price` CSV that may hold several symbols.
/// Duplicate (symbol, timestamp) rows keep the last occurrence.
LoadedPrices load_price_panel_csv(const std::filesystem::path& path, AssetClass asset_class);

/// Single-symbol variant; a file with more than one symbol is a data error.
PriceSeries load_price_csv(const std::filesystem::path& path, AssetClass asset_class,
                           std::size_t* duplicate_count = nullptr);

/// Writes the same CSV format the loaders read.
void write_price_csv(const std::filesystem::path& path, const std::vector<PriceSeries>& series);

struct DroppedDay {
    std::string symbol;
    Date date;
    std::string reason;
    std::size_t observed_count = 0;
    std::size_t required_count = 0;
};

struct IntradayReturns {
    std::string symbol;
    AssetClass asset_class = AssetClass::Crypto;
    std::size_t expected_obs = 0;
    /// Percent log returns per retained day.
    std::map<Date, std::vector<double>> days;
    std::vector<DroppedDay> dropped;
};

struct GridOptions {
    int grid_minutes = 5;
    double min_coverage = 0.8;
};

/// Expected intraday return count for an asset class on a grid.
std::size_t expected_returns(AssetClass ac, int grid_minutes);

/// Minimum return count a day needs to be retained.
std::size_t required_returns(std::size_t expected_obs, double min_coverage);

/// Snaps prices to the grid (exact slot timestamps only) and builds percent
/// log returns between consecutive filled slots of the same day.
IntradayReturns to_intraday_returns(const PriceSeries& series, const GridOptions& options = {});

void write_dropped_days_csv(const std::filesystem::path& path, const std::vector<DroppedDay>& dropped);

}  // namespace volharness
