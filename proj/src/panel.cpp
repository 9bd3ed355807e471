#include "dfc/panel.hpp"

#include <chrono>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dfc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::chrono::year_month_day parse_ymd(const std::string& s) {
  const int y = std::stoi(s.substr(0, 4));
  const unsigned m = static_cast<unsigned>(std::stoi(s.substr(5, 2)));
  const unsigned d = static_cast<unsigned>(std::stoi(s.substr(8, 2)));
  return std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

std::string format_ymd(const std::chrono::year_month_day& ymd) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace

bool is_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    if (s[i] < '0' || s[i] > '9') return false;
  return parse_ymd(s).ok();
}

std::vector<Index> Panel::positions(const std::vector<std::string>& names) const {
  std::vector<Index> pos;
  pos.reserve(names.size());
  for (const auto& name : names) {
    Index found = -1;
    for (std::size_t j = 0; j < columns.size(); ++j)
      if (columns[j] == name) found = static_cast<Index>(j);
    if (found < 0) throw ValidationError("column '" + name + "' is not in the panel header");
    pos.push_back(found);
  }
  return pos;
}

Panel Panel::select(const std::vector<std::string>& names) const {
  const auto pos = positions(names);
  Panel out;
  out.dates = dates;
  out.columns = names;
  out.values.resize(values.rows(), static_cast<Index>(names.size()));
  for (std::size_t j = 0; j < pos.size(); ++j) out.values.col(static_cast<Index>(j)) = values.col(pos[j]);
  return out;
}

Panel Panel::head(Index count) const {
  if (count < 0 || count > rows()) throw ValidationError("panel head: row count out of range");
  Panel out;
  out.dates.assign(dates.begin(), dates.begin() + count);
  out.columns = columns;
  out.values = values.topRows(count);
  return out;
}

Index Panel::rows_before(const std::string& date) const {
  if (!is_iso_date(date)) throw ValidationError("'" + date + "' is not an ISO-8601 date (YYYY-MM-DD)");
  Index k = 0;
  while (k < rows() && dates[static_cast<std::size_t>(k)] < date) ++k;
  return k;
}

Panel parse_panel_csv(const std::string& text, Index min_rows) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("panel: missing header row");
  const auto header = split_line(line);
  if (header.size() < 2) throw ValidationError("panel: header needs a date column and at least one series");
  Panel p;
  p.columns.assign(header.begin() + 1, header.end());
  const std::size_t width = p.columns.size();
  std::vector<double> cells;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto parts = split_line(line);
    std::ostringstream where;
    where << "panel row " << row;
    if (parts.size() != width + 1)
      throw ValidationError(where.str() + ": expected " + std::to_string(width + 1) + " cells, found " +
                            std::to_string(parts.size()));
    if (!is_iso_date(parts[0])) throw ValidationError(where.str() + ": malformed date '" + parts[0] + "'");
    if (!p.dates.empty() && !(p.dates.back() < parts[0]))
      throw ValidationError(where.str() + ": dates must be strictly increasing");
    p.dates.push_back(parts[0]);
    for (std::size_t j = 1; j <= width; ++j) {
      const std::string& c = parts[j];
      double v = 0.0;
      const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
      if (c.empty() || res.ec != std::errc() || res.ptr != c.data() + c.size() || !std::isfinite(v))
        throw ValidationError(where.str() + ": missing or non-numeric cell in column '" + p.columns[j - 1] + "'");
      cells.push_back(v);
    }
  }
  const Index T = static_cast<Index>(p.dates.size());
  if (T < min_rows)
    throw ValidationError("panel has " + std::to_string(T) + " rows; at least " + std::to_string(min_rows) +
                          " are required");
  p.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      cells.data(), T, static_cast<Index>(width));
  return p;
}

Panel read_panel_csv(const std::string& path, Index min_rows) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open panel file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_panel_csv(ss.str(), min_rows);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::string format_panel_csv(const Panel& panel) {
  std::ostringstream os;
  os << "date";
  for (const auto& c : panel.columns) os << ',' << c;
  os << '\n';
  char buf[64];
  for (Index t = 0; t < panel.rows(); ++t) {
    os << panel.dates[static_cast<std::size_t>(t)];
    for (Index j = 0; j < panel.values.cols(); ++j) {
      const auto res = std::to_chars(buf, buf + sizeof buf, panel.values(t, j));
      os << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    os << '\n';
  }
  return os.str();
}

void write_panel_csv(const std::string& path, const Panel& panel) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << format_panel_csv(panel);
}

std::vector<std::string> business_dates(const std::string& first, Index count) {
  if (!is_iso_date(first)) throw ValidationError("'" + first + "' is not an ISO-8601 date");
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(count));
  std::chrono::sys_days day{parse_ymd(first)};
  while (static_cast<Index>(out.size()) < count) {
    const std::chrono::weekday wd{day};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.push_back(format_ymd(std::chrono::year_month_day{day}));
    day += std::chrono::days{1};
  }
  return out;
}

}  // namespace dfc
