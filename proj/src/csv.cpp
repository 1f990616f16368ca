#include "lightfire/csv.h"
#include "lightfire/util.h"
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace lightfire::csv
{
namespace
{
std::vector<std::string> split_line(std::string_view line)
{
  if (!line.empty() && line.back() == '\r')
  {
    line.remove_suffix(1);
  }
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true)
  {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos)
    {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}
std::string row_msg(const std::string_view column, const std::size_t row)
{
  return " in column " + std::string(column) + " at row " + std::to_string(row);
}
}
Table Table::parse(const std::string_view text, const std::string& source)
{
  Table t;
  t.source_ = source;
  std::size_t start = 0;
  bool have_header = false;
  std::size_t line_no = 0;
  while (start < text.size())
  {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos)
    {
      end = text.size();
    }
    const auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.empty() || line == "\r")
    {
      continue;
    }
    auto fields = split_line(line);
    if (!have_header)
    {
      if (!fields.empty() && fields[0].starts_with("\xEF\xBB\xBF"))
      {
        fields[0].erase(0, 3);
      }
      t.header_ = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header_.size())
    {
      throw std::runtime_error(source + ": wrong field count at row " + std::to_string(t.rows_.size() + 1));
    }
    t.rows_.push_back(std::move(fields));
  }
  if (!have_header)
  {
    throw std::runtime_error(source + ": missing header row");
  }
  return t;
}
Table Table::read(const std::filesystem::path& path)
{
  return parse(read_text_file(path), path.string());
}
std::size_t Table::column(const std::string_view name) const
{
  for (std::size_t i = 0; i < header_.size(); ++i)
  {
    if (header_[i] == name)
    {
      return i;
    }
  }
  throw std::runtime_error(source_ + ": missing column " + std::string(name));
}
bool Table::has_column(const std::string_view name) const
{
  for (const auto& h : header_)
  {
    if (h == name)
    {
      return true;
    }
  }
  return false;
}
double parse_double(const std::string& field, const std::string_view column, const std::size_t row)
{
  if (field.empty())
  {
    throw std::runtime_error("missing value" + row_msg(column, row));
  }
  double x = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  if (*first == '+')
  {
    ++first;
  }
  const auto res = std::from_chars(first, last, x);
  if (res.ec != std::errc{} || res.ptr != last || !std::isfinite(x))
  {
    throw std::runtime_error("unparsable number '" + field + "'" + row_msg(column, row));
  }
  return x;
}
std::optional<double> parse_optional(const std::string& field, const std::string_view column, const std::size_t row)
{
  if (field.empty())
  {
    return std::nullopt;
  }
  return parse_double(field, column, row);
}
long parse_int(const std::string& field, const std::string_view column, const std::size_t row)
{
  long x = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), x);
  if (field.empty() || res.ec != std::errc{} || res.ptr != field.data() + field.size())
  {
    throw std::runtime_error("unparsable integer '" + field + "'" + row_msg(column, row));
  }
  return x;
}
Writer::Writer(const std::vector<std::string>& header)
{
  for (const auto& h : header)
  {
    field(h);
  }
  end_row();
}
Writer& Writer::field(const std::string_view s)
{
  if (!first_)
  {
    out_ += ',';
  }
  out_ += s;
  first_ = false;
  return *this;
}
Writer& Writer::field(const double x)
{
  return field(std::string_view{format_double(x)});
}
Writer& Writer::field(const std::optional<double>& x)
{
  return x ? field(*x) : field(std::string_view{});
}
Writer& Writer::field(const long x)
{
  return field(std::string_view{std::to_string(x)});
}
void Writer::end_row()
{
  out_ += '\n';
  first_ = true;
}
}
