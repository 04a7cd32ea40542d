#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace incident {

// Table cell: empty, text, integer count, or a real printed with 4 decimals.
using Cell = std::variant<std::monostate, std::string, std::int64_t, double>;

struct Report {
  std::string id;     // file stem, e.g. "exp2_rus"
  std::string title;  // human-readable caption
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, std::string>> footer;  // seed, fingerprints, counts
};

enum class ReportFormat { Csv, Markdown };

ReportFormat parse_report_format(std::string_view text);
std::string_view file_extension(ReportFormat format);

// Half-up (away from zero) rounding to `places` decimals, printed with
// exactly that many digits: 0.73643 -> "0.7364", 0.72675 -> "0.7268".
std::string format_decimal(double value, int places = 4);
std::string format_cell(const Cell& cell);

std::string render_report(const Report& report, ReportFormat format);
void emit_report(const Report& report, ReportFormat format, const std::filesystem::path& path);

// Header and body cells of a rendered report (footer dropped); used to
// compare the two formats and by golden tests.
std::vector<std::vector<std::string>> parse_rendered_table(std::string_view text, ReportFormat format);

}  // namespace incident
