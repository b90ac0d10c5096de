#include "volharness/marketdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "csv_util.hpp"
#include "volharness/error.hpp"
#include "volharness/numfmt.hpp"

namespace volharness {

namespace {

constexpr int kMinutesPerDay = 1440;
constexpr int kSessionOpenMinute = 9 * 60 + 30;
constexpr int kSessionCloseMinute = 16 * 60;

struct Row {
    std::string symbol;
    EpochSeconds ts;
    double price;
    std::size_t order;
};

std::string line_error(const std::filesystem::path& path, std::size_t line, const std::string& what) {
    std::ostringstream os;
    os << path.string() << ":" << line << ": " << what;
    return os.str();
}

}  // namespace

const char* to_string(AssetClass ac) {
    return ac == AssetClass::Crypto ? "crypto" : "equity";
}

AssetClass parse_asset_class(std::string_view text) {
    if (text == "crypto") return AssetClass::Crypto;
    if (text == "equity") return AssetClass::Equity;
    throw Error(ErrorKind::Usage, "unknown asset class '" + std::string(text) + "' (valid: crypto, equity)");
}

LoadedPrices load_price_panel_csv(const std::filesystem::path& path, AssetClass asset_class) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InputFormat, "cannot open " + path.string());

    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    int col_ts = -1, col_sym = -1, col_price = -1;
    std::size_t n_cols = 0;
    std::vector<Row> rows;

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (line_no == 1 && view.size() >= 3 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
        if (detail::trim(view).empty()) continue;
        auto fields = detail::split(view);
        if (!have_header) {
            for (std::size_t i = 0; i < fields.size(); ++i) {
                if (fields[i] == "timestamp") col_ts = static_cast<int>(i);
                else if (fields[i] == "symbol") col_sym = static_cast<int>(i);
                else if (fields[i] == "price") col_price = static_cast<int>(i);
            }
            if (col_ts < 0 || col_sym < 0 || col_price < 0) {
                throw Error(ErrorKind::InputFormat,
                            line_error(path, line_no, "header must contain timestamp,symbol,price"));
            }
            n_cols = fields.size();
            have_header = true;
            continue;
        }
        if (fields.size() != n_cols) {
            throw Error(ErrorKind::InputFormat, line_error(path, line_no, "expected " + std::to_string(n_cols) +
                                                                                " columns, got " +
                                                                                std::to_string(fields.size())));
        }
        auto ts = parse_timestamp(fields[col_ts]);
        if (!ts) {
            throw Error(ErrorKind::InputFormat,
                        line_error(path, line_no, "unparseable timestamp '" + std::string(fields[col_ts]) + "'"));
        }
        auto price = detail::parse_double(fields[col_price]);
        if (!price || !std::isfinite(*price)) {
            throw Error(ErrorKind::InputFormat,
                        line_error(path, line_no, "unparseable price '" + std::string(fields[col_price]) + "'"));
        }
        if (*price <= 0.0) {
            throw Error(ErrorKind::Data, line_error(path, line_no, "non-positive price"));
        }
        if (fields[col_sym].empty()) {
            throw Error(ErrorKind::InputFormat, line_error(path, line_no, "empty symbol"));
        }
        rows.push_back({std::string(fields[col_sym]), *ts, *price, rows.size()});
    }
    if (rows.empty()) throw Error(ErrorKind::EmptyInput, path.string() + ": no price rows");

    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return a.symbol != b.symbol ? a.symbol < b.symbol : a.ts < b.ts;
    });

    LoadedPrices out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& r = rows[i];
        if (i + 1 < rows.size() && rows[i + 1].symbol == r.symbol && rows[i + 1].ts == r.ts) {
            ++out.duplicate_count;  // a later occurrence wins
            continue;
        }
        if (out.series.empty() || out.series.back().symbol != r.symbol) {
            out.series.push_back({r.symbol, asset_class, {}});
        }
        out.series.back().points.push_back({r.ts, r.price});
    }
    return out;
}

PriceSeries load_price_csv(const std::filesystem::path& path, AssetClass asset_class,
                           std::size_t* duplicate_count) {
    auto loaded = load_price_panel_csv(path, asset_class);
    if (loaded.series.size() != 1) {
        throw Error(ErrorKind::Data, path.string() + ": expected one symbol, found " +
                                         std::to_string(loaded.series.size()));
    }
    if (duplicate_count) *duplicate_count = loaded.duplicate_count;
    return std::move(loaded.series.front());
}

void write_price_csv(const std::filesystem::path& path, const std::vector<PriceSeries>& series) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Data, "cannot write " + path.string());
    out << "timestamp,symbol,price\n";
    for (const auto& s : series) {
        for (const auto& p : s.points) {
            out << format_timestamp(p.timestamp) << ',' << s.symbol << ',' << format_double(p.price) << '\n';
        }
    }
}

std::size_t expected_returns(AssetClass ac, int grid_minutes) {
    if (grid_minutes <= 0 || kMinutesPerDay % grid_minutes != 0) {
        throw Error(ErrorKind::Usage, "grid_minutes must divide 1440");
    }
    if (ac == AssetClass::Crypto) return static_cast<std::size_t>(kMinutesPerDay / grid_minutes - 1);
    const int session = kSessionCloseMinute - kSessionOpenMinute;
    const int slots = (session + grid_minutes - 1) / grid_minutes;
    return static_cast<std::size_t>(slots - 1);
}

std::size_t required_returns(std::size_t expected_obs, double min_coverage) {
    // The small slack keeps products like 0.8 * 5 from rounding up to 5.
    return static_cast<std::size_t>(std::ceil(min_coverage * static_cast<double>(expected_obs) - 1e-9));
}

IntradayReturns to_intraday_returns(const PriceSeries& series, const GridOptions& options) {
    const std::size_t expected = expected_returns(series.asset_class, options.grid_minutes);
    if (!(options.min_coverage > 0.0 && options.min_coverage <= 1.0)) {
        throw Error(ErrorKind::Usage, "min_coverage must be in (0, 1]");
    }
    const std::size_t required = std::max<std::size_t>(1, required_returns(expected, options.min_coverage));
    const EpochSeconds step = static_cast<EpochSeconds>(options.grid_minutes) * 60;

    // Prices on grid slots, grouped by trading date. Points are sorted, so
    // each day's slots arrive in time order.
    std::map<Date, std::vector<double>> slot_prices;
    std::map<Date, std::size_t> seen_days;
    for (const auto& p : series.points) {
        Date day{};
        bool on_grid = false;
        if (series.asset_class == AssetClass::Crypto) {
            day = date_of(p.timestamp);
            on_grid = (p.timestamp - midnight_of(day)) % step == 0;
        } else {
            day = date_of(p.timestamp + new_york_utc_offset(p.timestamp));
            const EpochSeconds open = new_york_to_utc(day, kSessionOpenMinute);
            const EpochSeconds close = new_york_to_utc(day, kSessionCloseMinute);
            on_grid = p.timestamp >= open && p.timestamp < close && (p.timestamp - open) % step == 0;
        }
        ++seen_days[day];
        if (on_grid) slot_prices[day].push_back(p.price);
    }

    IntradayReturns out;
    out.symbol = series.symbol;
    out.asset_class = series.asset_class;
    out.expected_obs = expected;
    for (const auto& [day, count] : seen_days) {
        auto it = slot_prices.find(day);
        const std::size_t n_returns = (it == slot_prices.end() || it->second.empty()) ? 0 : it->second.size() - 1;
        if (n_returns < required) {
            out.dropped.push_back({series.symbol, day, "insufficient_coverage", n_returns, required});
            continue;
        }
        const auto& prices = it->second;
        std::vector<double> r(n_returns);
        for (std::size_t i = 1; i < prices.size(); ++i) {
            r[i - 1] = 100.0 * (std::log(prices[i]) - std::log(prices[i - 1]));
        }
        out.days.emplace(day, std::move(r));
    }
    if (out.days.empty()) {
        throw Error(ErrorKind::EmptyOutput, series.symbol + ": no day meets the coverage requirement");
    }
    return out;
}

void write_dropped_days_csv(const std::filesystem::path& path, const std::vector<DroppedDay>& dropped) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Data, "cannot write " + path.string());
    out << "symbol,date,reason,observed_count,required_count\n";
    for (const auto& d : dropped) {
        out << d.symbol << ',' << format_date(d.date) << ',' << d.reason << ',' << d.observed_count << ','
            << d.required_count << '\n';
    }
}

}  // namespace volharness
