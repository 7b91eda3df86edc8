#pragma once

#include <string>
#include <variant>
#include <vector>

#include "config.hpp"
#include "ehs/types.hpp"

namespace ehs::cli {

enum class Format { csv, json };

// Column-typed table; complex columns expand to name_re, name_im.
class DataTable {
 public:
  typedef std::variant<double, std::string> Cell;

  class Row {
   public:
    Row& operator<<(double v) {
      cells_.emplace_back(v);
      return *this;
    }
    Row& operator<<(int v) { return *this << static_cast<double>(v); }
    Row& operator<<(cd v) { return *this << v.real() << v.imag(); }
    Row& operator<<(const std::string& s) {
      cells_.emplace_back(s);
      return *this;
    }
    Row& operator<<(const char* s) { return *this << std::string(s); }
    const std::vector<Cell>& cells() const { return cells_; }

   private:
    std::vector<Cell> cells_;
  };

  explicit DataTable(std::string name) : name_(std::move(name)) {}

  DataTable& real(const std::string& c);
  DataTable& complex(const std::string& c);
  DataTable& text(const std::string& c);

  Row& row();

  const std::string& name() const { return name_; }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<bool>& is_text() const { return text_; }
  const std::vector<Row>& rows() const { return rows_; }

 private:
  std::string name_;
  std::vector<std::string> columns_;
  std::vector<bool> text_;
  std::vector<Row> rows_;
};

struct OutputContext {
  std::string dir;
  Format format = Format::csv;
  std::string command;
  Json config;
};

std::string render(const DataTable& t, const OutputContext& ctx);
// Writes <dir>/<command>_<table>.<ext> and returns the path.
std::string write_table(const DataTable& t, const OutputContext& ctx);
std::string format_number(double v);

}  // namespace ehs::cli
