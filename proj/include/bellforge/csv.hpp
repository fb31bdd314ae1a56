#pragma once

// RFC 4180 style CSV output: CRLF line ends, fields quoted only when needed,
// numbers printed with %.17g so they round-trip.

#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

namespace bellforge::csv {

std::string format_number(double v);
std::string quote(const std::string& field);

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void header(const std::vector<std::string>& names);
  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

}  // namespace bellforge::csv
