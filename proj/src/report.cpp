#include "incident/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/algorithm/string/trim.hpp>
#include <boost/tokenizer.hpp>

#include "incident/errors.hpp"

namespace incident {

namespace {

std::string csv_cell(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string md_cell(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

std::vector<std::string> split_md_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string current;
  // Skip the leading pipe; split on unescaped pipes.
  for (std::size_t i = 1; i < line.size(); ++i) {
    char c = line[i];
    if (c == '\\' && i + 1 < line.size() && line[i + 1] == '|') {
      current += '|';
      ++i;
    } else if (c == '|') {
      cells.push_back(boost::algorithm::trim_copy(current));
      current.clear();
    } else {
      current += c;
    }
  }
  return cells;
}

}  // namespace

ReportFormat parse_report_format(std::string_view text) {
  if (text == "csv") return ReportFormat::Csv;
  if (text == "md" || text == "markdown") return ReportFormat::Markdown;
  throw ArgumentError("report format must be 'csv' or 'md', got '" + std::string(text) + "'");
}

std::string_view file_extension(ReportFormat format) {
  return format == ReportFormat::Csv ? ".csv" : ".md";
}

std::string format_decimal(double value, int places) {
  if (!std::isfinite(value)) return "nan";
  const long double scale = std::pow(10.0L, places);
  const long double scaled = std::fabs(static_cast<long double>(value)) * scale;
  // The slack absorbs binary representation error so printed halves such as
  // 0.72675 round up as in hand arithmetic.
  const long double rounded = std::floor(scaled + 0.5L + 1e-9L * std::max(1.0L, scaled));
  auto digits = static_cast<unsigned long long>(rounded);
  const auto unit = static_cast<unsigned long long>(scale);
  std::string out;
  if (value < 0 && digits != 0) out += '-';
  out += std::to_string(digits / unit);
  if (places > 0) {
    std::string frac = std::to_string(digits % unit);
    out += '.';
    out += std::string(static_cast<std::size_t>(places) - frac.size(), '0');
    out += frac;
  }
  return out;
}

std::string format_cell(const Cell& cell) {
  struct {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_decimal(v); }
  } visitor;
  return std::visit(visitor, cell);
}

std::string render_report(const Report& report, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::Csv) {
    for (std::size_t c = 0; c < report.columns.size(); ++c) {
      out << (c ? "," : "") << csv_cell(report.columns[c]);
    }
    out << '\n';
    for (const auto& row : report.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_cell(format_cell(row[c]));
      out << '\n';
    }
    out << "# " << report.title << '\n';
    for (const auto& [key, value] : report.footer) out << "# " << key << ": " << value << '\n';
    return out.str();
  }

  out << "### " << report.title << "\n\n|";
  for (const auto& col : report.columns) out << ' ' << md_cell(col) << " |";
  out << "\n|";
  for (std::size_t c = 0; c < report.columns.size(); ++c) out << (c == 0 ? " --- |" : " ---: |");
  out << '\n';
  for (const auto& row : report.rows) {
    out << '|';
    for (const auto& cell : row) out << ' ' << md_cell(format_cell(cell)) << " |";
    out << '\n';
  }
  out << "\n(Rounded at the fifth digit)\n\n";
  for (const auto& [key, value] : report.footer) out << "- " << key << ": " << value << '\n';
  return out.str();
}

void emit_report(const Report& report, ReportFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write report " + path.string());
  out << render_report(report, format);
  if (!out) throw IoError("write failed for report " + path.string());
}

std::vector<std::vector<std::string>> parse_rendered_table(std::string_view text, ReportFormat format) {
  std::vector<std::vector<std::string>> table;
  std::istringstream in{std::string(text)};
  std::string line;
  if (format == ReportFormat::Csv) {
    using Separator = boost::escaped_list_separator<char>;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      boost::tokenizer<Separator> tokens(line, Separator('\\', ',', '"'));
      table.emplace_back(tokens.begin(), tokens.end());
    }
    return table;
  }
  bool separator_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] != '|') continue;
    if (!separator_seen && table.size() == 1) {
      separator_seen = true;  // the | --- | row under the header
      continue;
    }
    table.push_back(split_md_row(line));
  }
  return table;
}

}  // namespace incident
