// CSV emission and hashing helpers shared by the command-line tool.
#pragma once

#include <filesystem>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ondamp/integrator.hpp"

namespace ondamp {

inline constexpr std::string_view kSeriesHeader =
    "t,x1,x2,r,rdot,e1,e2,u,V,Vdot";

/// Shortest round-trip decimal in exponent notation, locale independent.
/// Throws std::domain_error on NaN or infinity.
std::string format_double(double v);

/// Writes rows of a fixed column count; cells are pre-formatted strings or
/// doubles.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);

  CsvWriter& cell(std::string_view text);
  CsvWriter& cell(double v);
  /// Throws std::logic_error unless exactly header.size() cells were added.
  void end_row();

 private:
  std::ostream& out_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

void write_series_csv(std::ostream& out, const TimeSeries& ts);
void write_series_csv(const std::filesystem::path& path, const TimeSeries& ts);

std::string sha256_hex(std::string_view data);

}  // namespace ondamp
