#include "hifi/trace_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "hifi/errors.hpp"

namespace hifi {
namespace {

constexpr int kColumns = 21;

void append_double(std::string& line, double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw ParseError("failed to format a trace value");
  line.append(buf, ptr);
}

double parse_field(const std::string& field, const std::string& path,
                   std::size_t line_no) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(path + ":" + std::to_string(line_no) +
                     ": '" + field + "' is not a number");
  }
  return value;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

void write_trace_csv(const std::string& path, const SimTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");

  out << kTraceHeader << '\n';
  std::string line;
  for (Eigen::Index k = 0; k < trace.rows(); ++k) {
    line.clear();
    append_double(line, trace.t(k));
    for (int j = 0; j < 5; ++j) {
      line.push_back(',');
      append_double(line, trace.x_a(k, j));
    }
    for (int j = 0; j < 5; ++j) {
      line.push_back(',');
      append_double(line, trace.x_hat(k, j));
    }
    for (int j = 0; j < 4; ++j) {
      line.push_back(',');
      append_double(line, trace.e(k, j));
    }
    for (int j = 0; j < 4; ++j) {
      line.push_back(',');
      append_double(line, trace.y(k, j));
    }
    line.push_back(',');
    append_double(line, trace.w(k));
    line.push_back(',');
    append_double(line, trace.tau(k));
    line.push_back('\n');
    out << line;
  }
  if (!out) throw ParseError("failed while writing '" + path + "'");
}

SimTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "' for reading");

  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("'" + path + "' is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) {
    throw ParseError("'" + path + "' has an unexpected header: " + line);
  }

  std::vector<std::array<double, kColumns>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv(line);
    if (fields.size() != kColumns) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(kColumns) + " columns, found " +
                       std::to_string(fields.size()));
    }
    std::array<double, kColumns> row{};
    for (int j = 0; j < kColumns; ++j) {
      row[static_cast<std::size_t>(j)] =
          parse_field(fields[static_cast<std::size_t>(j)], path, line_no);
    }
    rows.push_back(row);
  }

  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  SimTrace trace;
  trace.t.resize(n);
  trace.x_a.resize(n, 5);
  trace.x_hat.resize(n, 5);
  trace.e.resize(n, 4);
  trace.y.resize(n, 4);
  trace.w.resize(n);
  trace.tau.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& row = rows[static_cast<std::size_t>(k)];
    trace.t(k) = row[0];
    for (int j = 0; j < 5; ++j) trace.x_a(k, j) = row[1 + j];
    for (int j = 0; j < 5; ++j) trace.x_hat(k, j) = row[6 + j];
    for (int j = 0; j < 4; ++j) trace.e(k, j) = row[11 + j];
    for (int j = 0; j < 4; ++j) trace.y(k, j) = row[15 + j];
    trace.w(k) = row[19];
    trace.tau(k) = row[20];
  }
  return trace;
}

}  // namespace hifi
