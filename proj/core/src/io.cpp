#include "tvcount/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/tokenizer.hpp>

namespace tvcount {

std::string_view to_string(CountMode mode) { return mode == CountMode::daily ? "daily" : "cumulative"; }

namespace {

using Row = std::vector<std::string>;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

Row split_csv_line(const std::string& line) {
    boost::tokenizer<boost::escaped_list_separator<char>> tok(line);
    Row row;
    for (const auto& field : tok) row.push_back(trim(field));
    return row;
}

std::vector<Row> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::vector<Row> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            rows.push_back(split_csv_line(line));
        } catch (const boost::escaped_list_error& e) {
            throw RowParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (rows.empty()) throw DataError("'" + path.string() + "' is empty");
    return rows;
}

std::int64_t parse_count(const std::string& field, const std::string& where) {
    std::int64_t value = 0;
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec == std::errc() && ptr == last) return value;
    // Some exports write counts as "12.0".
    double d = 0.0;
    auto [dptr, dec] = std::from_chars(first, last, d);
    if (dec == std::errc() && dptr == last && d == std::floor(d) && std::abs(d) < 9e15) {
        return static_cast<std::int64_t>(d);
    }
    throw RowParseError(where + ": cannot parse count '" + field + "'");
}

bool in_range(const std::string& key, const DateRange& range) {
    if (range.from && key < normalize_date(*range.from)) return false;
    if (range.to && key > normalize_date(*range.to)) return false;
    return true;
}

struct Observation {
    std::string label;
    std::int64_t count;
};

std::vector<Observation> read_long(const std::vector<Row>& rows, const std::filesystem::path& path,
                                   const LoadOptions& options) {
    const Row& header = rows.front();
    auto column = [&](std::string_view name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (lower(header[i]) == name) return i;
        }
        throw RowParseError(path.string() + ": missing column '" + std::string(name) + "'");
    };
    const auto date_col = column("date");
    const auto region_col = column("region");
    const auto count_col = column("count");
    const auto width = std::max({date_col, region_col, count_col}) + 1;

    std::set<std::string> regions;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() < width) {
            throw RowParseError(path.string() + ": row " + std::to_string(r + 1) + " has too few fields");
        }
        regions.insert(rows[r][region_col]);
    }
    std::string region = options.region;
    if (region.empty()) {
        if (regions.size() != 1) {
            throw MissingRegionError(path.string() + " holds " + std::to_string(regions.size()) +
                                     " regions; select one");
        }
        region = *regions.begin();
    } else if (!regions.contains(region)) {
        throw MissingRegionError("region '" + region + "' not found in " + path.string());
    }

    std::vector<Observation> obs;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const Row& row = rows[r];
        if (row[region_col] != region) continue;
        if (!in_range(normalize_date(row[date_col]), options.range)) continue;
        obs.push_back({row[date_col], parse_count(row[count_col], path.string() + ":" + std::to_string(r + 1))});
    }
    return obs;
}

std::vector<Observation> read_wide(const std::vector<Row>& rows, const std::filesystem::path& path,
                                   const LoadOptions& options) {
    const Row& header = rows.front();
    constexpr std::size_t kFirstDate = 4;
    if (header.size() <= kFirstDate) throw RowParseError(path.string() + ": wide layout has no date columns");
    if (options.region.empty()) throw MissingRegionError("wide layout requires a region (country or province)");

    std::vector<std::int64_t> totals(header.size() - kFirstDate, 0);
    bool found = false;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const Row& row = rows[r];
        if (row.size() != header.size()) {
            throw RowParseError(path.string() + ": row " + std::to_string(r + 1) + " has " +
                                std::to_string(row.size()) + " fields, header has " + std::to_string(header.size()));
        }
        if (row[0] != options.region && row[1] != options.region) continue;
        found = true;
        for (std::size_t c = kFirstDate; c < row.size(); ++c) {
            totals[c - kFirstDate] += parse_count(row[c], path.string() + ":" + std::to_string(r + 1));
        }
    }
    if (!found) throw MissingRegionError("region '" + options.region + "' not found in " + path.string());

    std::vector<Observation> obs;
    for (std::size_t c = kFirstDate; c < header.size(); ++c) {
        if (!in_range(normalize_date(header[c]), options.range)) continue;
        obs.push_back({header[c], totals[c - kFirstDate]});
    }
    return obs;
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

} // namespace

std::string normalize_date(std::string_view label) {
    const std::string s = trim(label);
    if (all_digits(s)) return std::string(s.size() < 12 ? 12 - s.size() : 0, '0') + s;
    // M/D/YY or M/D/YYYY
    const auto a = s.find('/');
    const auto b = a == std::string::npos ? std::string::npos : s.find('/', a + 1);
    if (b != std::string::npos) {
        const std::string m = s.substr(0, a), d = s.substr(a + 1, b - a - 1), y = s.substr(b + 1);
        if (all_digits(m) && all_digits(d) && all_digits(y) && m.size() <= 2 && d.size() <= 2 &&
            (y.size() == 2 || y.size() == 4)) {
            const std::string year = y.size() == 2 ? "20" + y : y;
            return year + "-" + (m.size() == 1 ? "0" : "") + m + "-" + (d.size() == 1 ? "0" : "") + d;
        }
    }
    return s;
}

std::size_t difference_cumulative(std::span<const std::int64_t> cumulative, std::vector<std::int64_t>& daily) {
    daily.clear();
    std::size_t clamped = 0;
    for (std::size_t i = 1; i < cumulative.size(); ++i) {
        const auto diff = cumulative[i] - cumulative[i - 1];
        if (diff < 0) ++clamped;
        daily.push_back(std::max<std::int64_t>(diff, 0));
    }
    return clamped;
}

LoadReport load_count_series(const std::filesystem::path& path, const LoadOptions& options) {
    const auto rows = read_csv(path);
    LoadReport report;
    report.mode = options.mode;

    std::vector<Observation> obs;
    const bool wide = rows.front().size() > 1 && lower(rows.front()[1]) == "country/region";
    if (wide) {
        report.format = "wide";
        obs = read_wide(rows, path, options);
    } else {
        report.format = "long";
        obs = read_long(rows, path, options);
    }
    if (obs.empty()) throw EmptySelectionError("no rows selected from " + path.string());

    if (options.mode == CountMode::daily) {
        for (const auto& o : obs) {
            if (o.count < 0) throw RowParseError("negative daily count on " + o.label);
            report.series.values.push_back(o.count);
            report.series.labels.push_back(o.label);
        }
        return report;
    }

    if (obs.size() < 2) throw EmptySelectionError("cumulative series needs at least two selected rows");
    std::vector<std::int64_t> cumulative;
    for (const auto& o : obs) cumulative.push_back(o.count);
    difference_cumulative(cumulative, report.series.values);
    for (std::size_t i = 1; i < obs.size(); ++i) {
        report.series.labels.push_back(obs[i].label);
        if (cumulative[i] < cumulative[i - 1]) {
            report.warnings.push_back("cumulative count decreases on " + obs[i].label + "; daily count set to 0");
        }
    }
    return report;
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

void write_series_csv(const std::filesystem::path& path, const CountSeries& series, std::string_view region) {
    std::ostringstream out;
    out << "date,region,count\n";
    for (std::size_t t = 0; t < series.size(); ++t) {
        const std::string date = series.labels.empty() ? std::to_string(t + 1) : series.labels[t];
        out << date << ',' << region << ',' << series.values[t] << '\n';
    }
    write_text(path, out.str());
}

void write_lambda_csv(const std::filesystem::path& path, std::span<const double> lambda) {
    std::ostringstream out;
    out << "t,lambda\n";
    for (std::size_t t = 0; t < lambda.size(); ++t) out << t + 1 << ',' << format_double(lambda[t]) << '\n';
    write_text(path, out.str());
}

void write_draws_csv(const std::filesystem::path& path, const FitResult& fit) {
    std::ostringstream out;
    out << "draw,log_posterior";
    for (const auto& name : coordinate_names(fit.spec)) out << ',' << name;
    out << '\n';
    for (std::size_t d = 0; d < fit.draws.size(); ++d) {
        out << d + 1 << ',' << format_double(d < fit.log_posterior.size() ? fit.log_posterior[d] : 0.0);
        for (double v : flatten(fit.draws[d], fit.spec)) out << ',' << format_double(v);
        out << '\n';
    }
    write_text(path, out.str());
}

void write_summary_csv(const std::filesystem::path& path, const FunctionSummary& summary) {
    std::ostringstream out;
    out << "grid,mean,lower,upper\n";
    for (std::size_t g = 0; g < summary.grid.size(); ++g) {
        out << format_double(summary.grid[g]) << ',' << format_double(summary.mean[g]) << ','
            << format_double(summary.lower[g]) << ',' << format_double(summary.upper[g]) << '\n';
    }
    write_text(path, out.str());
}

void write_fitted_csv(const std::filesystem::path& path, const CountSeries& series,
                      std::span<const double> lambda_hat) {
    std::ostringstream out;
    out << "t,date,count,lambda_hat\n";
    for (std::size_t t = 0; t < series.size(); ++t) {
        const std::string date = series.labels.empty() ? std::to_string(t + 1) : series.labels[t];
        out << t + 1 << ',' << date << ',' << series.values[t] << ',' << format_double(lambda_hat[t]) << '\n';
    }
    write_text(path, out.str());
}

std::vector<ParamState> read_draws_csv(const std::filesystem::path& path, const ModelSpec& spec) {
    const auto rows = read_csv(path);
    const auto names = coordinate_names(spec);
    const Row& header = rows.front();
    if (header.size() != names.size() + 2 || !std::equal(names.begin(), names.end(), header.begin() + 2)) {
        throw RowParseError(path.string() + ": draw columns do not match the model");
    }
    std::vector<ParamState> draws;
    std::vector<double> coords(names.size());
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != header.size()) {
            throw RowParseError(path.string() + ": row " + std::to_string(r + 1) + " has the wrong width");
        }
        for (std::size_t c = 0; c < names.size(); ++c) {
            const auto& f = rows[r][c + 2];
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), coords[c]);
            if (ec != std::errc() || ptr != f.data() + f.size()) {
                throw RowParseError(path.string() + ":" + std::to_string(r + 1) + ": bad number '" + f + "'");
            }
        }
        draws.push_back(unflatten(coords, spec));
    }
    return draws;
}

} // namespace tvcount
