#ifndef PETITIONS_COMMON_HPP
#define PETITIONS_COMMON_HPP

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace petitions {

/// Base class for every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

using Date = std::chrono::sys_days;

/// Parses the leading `YYYY-MM-DD` of an ISO-8601 date or timestamp.
Date parse_date(std::string_view iso);
std::string format_date(Date d);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_real(double v);

/// Inclusive calendar-day window.
struct DateWindow {
    Date start;
    Date end;

    bool contains(Date d) const { return d >= start && d <= end; }
    std::int64_t days() const { return (end - start).count() + 1; }
    bool operator==(const DateWindow&) const = default;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t splitmix64(std::uint64_t x);

/// Child seed for a named pipeline stage: splitmix64(seed + fnv1a64(stage)).
std::uint64_t child_seed(std::uint64_t seed, std::string_view stage);

std::string to_hex(std::uint64_t v);

/// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_csv_line(std::string_view line);
std::string csv_escape(std::string_view field);

/// Provenance written at the top of every output file.
struct MetadataHeader {
    std::string tool_version = PETITIONS_VERSION;
    std::string config_hash;
    std::uint64_t seed = 0;

    /// `# petitions <version> config_hash=<hash> seed=<seed>`
    std::string csv_line() const;
};

} // namespace petitions

#endif
