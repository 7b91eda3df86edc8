#include "table.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#include "ehs/version.hpp"

namespace ehs::cli {

DataTable& DataTable::real(const std::string& c) {
  columns_.push_back(c);
  text_.push_back(false);
  return *this;
}

DataTable& DataTable::complex(const std::string& c) { return real(c + "_re").real(c + "_im"); }

DataTable& DataTable::text(const std::string& c) {
  columns_.push_back(c);
  text_.push_back(true);
  return *this;
}

DataTable::Row& DataTable::row() {
  rows_.emplace_back();
  return rows_.back();
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // folds -0
  return fmt::format("{:.17g}", v);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void check_shape(const DataTable& t) {
  for (std::size_t r = 0; r < t.rows().size(); ++r) {
    const auto& cells = t.rows()[r].cells();
    if (cells.size() != t.columns().size())
      throw std::logic_error(fmt::format("table {} row {} has {} cells for {} columns", t.name(), r, cells.size(),
                                         t.columns().size()));
    for (std::size_t c = 0; c < cells.size(); ++c)
      if (std::holds_alternative<std::string>(cells[c]) != t.is_text()[c])
        throw std::logic_error(fmt::format("table {} column {} has the wrong cell type", t.name(), t.columns()[c]));
  }
}

std::string render_csv(const DataTable& t, const OutputContext& ctx) {
  std::string out;
  out += fmt::format("# ehs {}\n", version_string);
  out += fmt::format("# command: {}\n", ctx.command);
  out += fmt::format("# table: {}\n", t.name());
  out += fmt::format("# config: {}\n", ctx.config.dump());
  for (std::size_t c = 0; c < t.columns().size(); ++c) out += (c ? "," : "") + t.columns()[c];
  out += "\n";
  for (const auto& row : t.rows()) {
    const auto& cells = row.cells();
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out += ",";
      if (const auto* s = std::get_if<std::string>(&cells[c]))
        out += csv_field(*s);
      else
        out += format_number(std::get<double>(cells[c]));
    }
    out += "\n";
  }
  return out;
}

// Numbers are written with the same 17-digit text as the CSV files so both formats
// round-trip identically; non-finite values become null.
std::string render_json(const DataTable& t, const OutputContext& ctx) {
  Json head;
  head["version"] = version_string;
  head["command"] = ctx.command;
  head["table"] = t.name();
  head["config"] = ctx.config;
  head["columns"] = t.columns();
  std::string out = head.dump(2);
  out.erase(out.size() - 2);  // reopen the object: drop "\n}"
  out += ",\n  \"rows\": [";
  for (std::size_t r = 0; r < t.rows().size(); ++r) {
    out += r ? ",\n    [" : "\n    [";
    const auto& cells = t.rows()[r].cells();
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out += ", ";
      if (const auto* s = std::get_if<std::string>(&cells[c])) {
        out += Json(*s).dump();
      } else {
        const double v = std::get<double>(cells[c]);
        out += std::isfinite(v) ? format_number(v) : "null";
      }
    }
    out += "]";
  }
  out += t.rows().empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

}  // namespace

std::string render(const DataTable& t, const OutputContext& ctx) {
  check_shape(t);
  return ctx.format == Format::csv ? render_csv(t, ctx) : render_json(t, ctx);
}

std::string write_table(const DataTable& t, const OutputContext& ctx) {
  const std::string text = render(t, ctx);
  std::filesystem::create_directories(ctx.dir);
  const std::string path = (std::filesystem::path(ctx.dir) /
                            (ctx.command + "_" + t.name() + (ctx.format == Format::csv ? ".csv" : ".json")))
                               .string();
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path);
  return path;
}

}  // namespace ehs::cli
