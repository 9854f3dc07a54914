#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tvcount/inference.hpp"
#include "tvcount/model.hpp"
#include "tvcount/sampler.hpp"

namespace tvcount {

// ---------------------------------------------------------------------------
// Loading count series

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingRegionError : DataError {
    using DataError::DataError;
};
struct RowParseError : DataError {
    using DataError::DataError;
};
struct EmptySelectionError : DataError {
    using DataError::DataError;
};

enum class CountMode { daily, cumulative };

std::string_view to_string(CountMode mode);

/// Inclusive date bounds; either side may be open. Dates are compared after
/// normalization to ISO form (M/D/YY and M/D/YYYY are accepted).
struct DateRange {
    std::optional<std::string> from;
    std::optional<std::string> to;
};

struct LoadOptions {
    std::string region; // empty: the file must hold a single region
    DateRange range;
    CountMode mode = CountMode::daily;
};

struct LoadReport {
    CountSeries series;
    CountMode mode = CountMode::daily;
    std::string format; // "long" or "wide"
    std::vector<std::string> warnings;
};

/// Reads either a long CSV with `date,region,count` columns or the wide
/// layout `Province/State,Country/Region,Lat,Long,<date>...` (rows matching
/// the region by country or province are summed). Cumulative input is
/// differenced after date selection, dropping the first selected row as the
/// anchor; negative differences become 0 with a warning.
LoadReport load_count_series(const std::filesystem::path& path, const LoadOptions& options);

/// Sortable key for a date label: ISO dates as-is, M/D/YY(YY) rewritten to
/// ISO, plain integers zero-padded, anything else unchanged.
std::string normalize_date(std::string_view label);

/// Differences cumulative counts; the first value is the anchor. Returns the
/// number of negative differences clamped to 0.
std::size_t difference_cumulative(std::span<const std::int64_t> cumulative, std::vector<std::int64_t>& daily);

// ---------------------------------------------------------------------------
// Writing artifacts

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

/// Long format `date,region,count`; unlabelled series use t = 1..T as the date.
void write_series_csv(const std::filesystem::path& path, const CountSeries& series, std::string_view region);
/// `t,lambda`.
void write_lambda_csv(const std::filesystem::path& path, std::span<const double> lambda);
/// `draw,log_posterior,<coordinate names>`.
void write_draws_csv(const std::filesystem::path& path, const FitResult& fit);
/// `grid,mean,lower,upper`.
void write_summary_csv(const std::filesystem::path& path, const FunctionSummary& summary);
/// `t,date,count,lambda_hat`.
void write_fitted_csv(const std::filesystem::path& path, const CountSeries& series, std::span<const double> lambda_hat);

/// Reads draws written by write_draws_csv back into states for `spec`.
std::vector<ParamState> read_draws_csv(const std::filesystem::path& path, const ModelSpec& spec);

} // namespace tvcount
