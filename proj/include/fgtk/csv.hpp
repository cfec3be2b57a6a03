#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace fgtk {

// CSV emitter: header row, data rows, one trailing metadata comment with the
// seed, version and model hash. Numbers are printed with %.12g so output is
// byte-stable across runs and worker counts.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

  static std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
  }

  void add_row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

  void write(std::ostream& os, std::uint64_t seed, const std::string& version,
             std::uint64_t model_hash) const {
    for (std::size_t i = 0; i < header_.size(); ++i) os << (i ? "," : "") << header_[i];
    os << "\n";
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
      os << "\n";
    }
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(model_hash));
    os << "# seed=" << seed << " version=" << version << " model=" << hash << "\n";
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace fgtk
