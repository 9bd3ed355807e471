#pragma once

// Date-indexed CSV panels: header row, ISO-8601 dates in the first column,
// one numeric column per series.

#include "dfc/common.hpp"

#include <string>
#include <vector>

namespace dfc {

struct Panel {
  std::vector<std::string> dates;
  std::vector<std::string> columns;
  Matrix values;  // rows x columns

  Index rows() const { return values.rows(); }
  // Column positions of `names`; ValidationError for unknown names.
  std::vector<Index> positions(const std::vector<std::string>& names) const;
  Panel select(const std::vector<std::string>& names) const;
  Panel head(Index count) const;
  // Number of rows dated strictly before `date`.
  Index rows_before(const std::string& date) const;
};

// True for a valid calendar date in YYYY-MM-DD form.
bool is_iso_date(const std::string& s);

Panel parse_panel_csv(const std::string& text, Index min_rows = 0);
Panel read_panel_csv(const std::string& path, Index min_rows = 0);
std::string format_panel_csv(const Panel& panel);
void write_panel_csv(const std::string& path, const Panel& panel);

// Consecutive business-day style labels starting at `first` (weekends skipped).
std::vector<std::string> business_dates(const std::string& first, Index count);

}  // namespace dfc
