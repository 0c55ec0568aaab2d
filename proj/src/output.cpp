#include "ondamp/output.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace ondamp {

std::string format_double(double v) {
  if (!std::isfinite(v)) {
    throw std::domain_error("refusing to write a non-finite value to CSV");
  }
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::scientific);
  return std::string(buf.data(), res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header)
    : out_(out), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    out_ << (i ? "," : "") << header[i];
  }
  out_ << '\n';
}

CsvWriter& CsvWriter::cell(std::string_view text) {
  if (filled_ == columns_) {
    throw std::logic_error("CSV row has too many cells");
  }
  out_ << (filled_++ ? "," : "") << text;
  return *this;
}

CsvWriter& CsvWriter::cell(double v) { return cell(format_double(v)); }

void CsvWriter::end_row() {
  if (filled_ != columns_) {
    throw std::logic_error("CSV row has too few cells");
  }
  out_ << '\n';
  filled_ = 0;
}

void write_series_csv(std::ostream& out, const TimeSeries& ts) {
  out << kSeriesHeader << '\n';
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double row[] = {ts.t[i],  ts.x1[i], ts.x2[i], ts.r[i], ts.rdot[i],
                          ts.e1[i], ts.e2[i], ts.u[i],  ts.V[i], ts.Vdot[i]};
    for (std::size_t c = 0; c < std::size(row); ++c) {
      out << (c ? "," : "") << format_double(row[c]);
    }
    out << '\n';
  }
}

void write_series_csv(const std::filesystem::path& path, const TimeSeries& ts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  write_series_csv(out, ts);
  if (!out.flush()) {
    throw std::runtime_error("failed writing " + path.string());
  }
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

}  // namespace ondamp
