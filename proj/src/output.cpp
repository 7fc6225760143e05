#include "pafit/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pafit {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root)) {
  if (root_.empty()) throw std::invalid_argument("output directory must not be empty");
  std::filesystem::create_directories(root_);
}

std::filesystem::path OutputDir::resolve(std::string_view relative) const {
  const std::filesystem::path rel(relative);
  if (rel.empty() || rel.is_absolute() || rel.has_root_name() || rel.has_root_directory())
    throw std::invalid_argument("output path must be relative: " + std::string(relative));
  for (const auto& part : rel)
    if (part == "..") throw std::invalid_argument("output path escapes the output directory: " + std::string(relative));
  return root_ / rel;
}

void OutputDir::write(std::string_view relative, std::string_view content) const {
  const auto path = resolve(relative);
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("failed to write " + path.string());
}

std::string csv_cell(double x) { return format_double(x); }
std::string csv_cell(std::uint64_t x) { return std::to_string(x); }
std::string csv_cell(std::int64_t x) { return std::to_string(x); }

CsvTable::CsvTable(const std::vector<std::string>& header) : width_(header.size()) {
  commit(header);
  rows_ = 0;
}

void CsvTable::commit(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw std::logic_error("csv row width does not match header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
  ++rows_;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace pafit
