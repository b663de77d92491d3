#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "seiqr/model.hpp"

namespace seiqr {

/// Malformed case file; `line` is 1-based and counts the header.
class IngestError : public std::runtime_error {
 public:
  IngestError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line), message_(message) {}
  std::size_t line() const { return line_; }
  const std::string& message() const { return message_; }

 private:
  std::size_t line_;
  std::string message_;
};

/// Parses `date,region,cases` rows. Rows of different regions may be
/// interleaved, but within a region dates must increase by exactly one day.
/// When `known_regions` is non-empty every region must be listed there.
/// Series are returned in order of first appearance.
std::vector<CaseSeries> read_cases(std::istream& in, const std::vector<std::string>& known_regions = {});
std::vector<CaseSeries> ingest(const std::string& path, const std::vector<std::string>& known_regions = {});

/// Writes rows date-major (all regions of a day, then the next day).
void write_cases(std::ostream& out, const std::vector<CaseSeries>& series);
void write_cases(const std::string& path, const std::vector<CaseSeries>& series);

/// Daily sum over regions. All series must cover the same dates.
CaseSeries aggregate_provincial(const std::vector<CaseSeries>& series, const std::string& name = "province");

/// Restriction of a series to [first, last] (clamped to its own range).
CaseSeries clip(const CaseSeries& series, Date first, Date last);

}  // namespace seiqr
