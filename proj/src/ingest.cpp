#include "seiqr/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

namespace seiqr {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

std::vector<CaseSeries> read_cases(std::istream& in, const std::vector<std::string>& known_regions) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<CaseSeries> series;
  std::map<std::string, std::size_t> index;
  std::map<std::string, std::set<Date>> seen;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "date" || fields[1] != "region" || fields[2] != "cases") {
        throw IngestError(line_no, "expected header 'date,region,cases'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) throw IngestError(line_no, "expected 3 fields, found " + std::to_string(fields.size()));

    Date date;
    try {
      date = parse_date(fields[0]);
    } catch (const std::exception&) {
      throw IngestError(line_no, "invalid date '" + fields[0] + "'");
    }
    const std::string& region = fields[1];
    if (region.empty()) throw IngestError(line_no, "empty region");
    if (!known_regions.empty() &&
        std::find(known_regions.begin(), known_regions.end(), region) == known_regions.end()) {
      throw IngestError(line_no, "unknown region '" + region + "'");
    }
    long long count = 0;
    const std::string& text = fields[2];
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), count);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
      throw IngestError(line_no, "cases '" + text + "' is not an integer");
    }
    if (count < 0) throw IngestError(line_no, "negative count " + text + " for " + region + " on " + fields[0]);

    if (!seen[region].insert(date).second) {
      throw IngestError(line_no, "duplicate entry for " + region + " on " + fields[0]);
    }
    auto it = index.find(region);
    if (it == index.end()) {
      index.emplace(region, series.size());
      series.push_back(CaseSeries{region, date, {count}});
      continue;
    }
    CaseSeries& s = series[it->second];
    const Date expected = add_days(s.last(), 1);
    if (date < expected) {
      throw IngestError(line_no, "dates for " + region + " are not increasing (" + fields[0] + " after " +
                                     format_date(s.last()) + ")");
    }
    if (date > expected) {
      throw IngestError(line_no, "gap in " + region + ": missing " + format_date(expected) + " to " +
                                     format_date(add_days(date, -1)));
    }
    s.counts.push_back(count);
  }
  if (!header_seen) throw IngestError(std::max<std::size_t>(line_no, 1), "empty case file");
  return series;
}

std::vector<CaseSeries> ingest(const std::string& path, const std::vector<std::string>& known_regions) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open case file '" + path + "'");
  try {
    return read_cases(in, known_regions);
  } catch (const IngestError& e) {
    throw IngestError(e.line(), e.message() + " in " + path);
  }
}

void write_cases(std::ostream& out, const std::vector<CaseSeries>& series) {
  out << "date,region,cases\n";
  if (series.empty()) return;
  Date first = series.front().first;
  Date last = series.front().last();
  for (const auto& s : series) {
    if (s.empty()) continue;
    first = std::min(first, s.first);
    last = std::max(last, s.last());
  }
  for (Date d = first; d <= last; d = add_days(d, 1)) {
    for (const auto& s : series) {
      if (s.empty() || d < s.first || d > s.last()) continue;
      out << format_date(d) << ',' << s.region << ',' << s.counts[static_cast<std::size_t>(days_between(s.first, d))]
          << '\n';
    }
  }
}

void write_cases(const std::string& path, const std::vector<CaseSeries>& series) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_cases(out, series);
}

CaseSeries aggregate_provincial(const std::vector<CaseSeries>& series, const std::string& name) {
  if (series.empty()) throw std::invalid_argument("no series to aggregate");
  CaseSeries total{name, series.front().first, series.front().counts};
  for (std::size_t k = 1; k < series.size(); ++k) {
    const CaseSeries& s = series[k];
    if (s.first != total.first || s.size() != total.size()) {
      throw std::invalid_argument("series '" + s.region + "' covers " + format_date(s.first) + " to " +
                                  format_date(s.last()) + ", expected " + format_date(total.first) + " to " +
                                  format_date(total.last()));
    }
    for (std::size_t i = 0; i < s.size(); ++i) total.counts[i] += s.counts[i];
  }
  return total;
}

CaseSeries clip(const CaseSeries& series, Date first, Date last) {
  CaseSeries out{series.region, std::max(first, series.first), {}};
  if (series.empty()) return out;
  const Date end = std::min(last, series.last());
  for (Date d = out.first; d <= end; d = add_days(d, 1)) {
    out.counts.push_back(series.counts[static_cast<std::size_t>(days_between(series.first, d))]);
  }
  return out;
}

}  // namespace seiqr
