#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace pafit {

/// Shortest decimal that parses back to the same double ("inf", "-inf",
/// "nan" for non-finite values).
std::string format_double(double x);

/// Writes files below a fixed root and refuses any path that would escape it.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  /// `relative` must be a relative path without ".." components.
  std::filesystem::path resolve(std::string_view relative) const;
  void write(std::string_view relative, std::string_view content) const;

 private:
  std::filesystem::path root_;
};

std::string csv_cell(double x);
std::string csv_cell(std::uint64_t x);
std::string csv_cell(std::int64_t x);
inline std::string csv_cell(int x) { return csv_cell(static_cast<std::int64_t>(x)); }
inline std::string csv_cell(std::string_view s) { return std::string(s); }
inline std::string csv_cell(const char* s) { return std::string(s); }

/// Small CSV builder; doubles go through format_double.
class CsvTable {
 public:
  explicit CsvTable(const std::vector<std::string>& header);

  template <class... Ts>
  void add(const Ts&... xs) {
    commit({csv_cell(xs)...});
  }
  void add_cells(const std::vector<std::string>& cells) { commit(cells); }

  std::size_t rows() const { return rows_; }
  const std::string& str() const { return text_; }

 private:
  void commit(const std::vector<std::string>& cells);

  std::size_t width_;
  std::size_t rows_ = 0;
  std::string text_;
};

std::string read_file(const std::filesystem::path& path);

}  // namespace pafit
