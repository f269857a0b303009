#include "smoothrl/envs/trace_io.hpp"

#include "smoothrl/error.hpp"
#include "smoothrl/io.hpp"

#include <charconv>
#include <sstream>

namespace smoothrl::envs {

void write_trace_csv(const std::filesystem::path& path, const std::vector<std::vector<double>>& rows,
                     const std::string& column_prefix) {
  const std::size_t dims = rows.empty() ? 0 : rows.front().size();
  std::string out = "step";
  for (std::size_t d = 0; d < dims; ++d) out += "," + column_prefix + std::to_string(d);
  out += "\n";
  char buf[64];
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t].size() != dims) throw InputError("trace rows have differing widths");
    out += std::to_string(t);
    for (double v : rows[t]) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
      out += ',';
      out.append(buf, end);
    }
    out += "\n";
  }
  write_file_atomic(path, out);
}

std::vector<std::vector<double>> read_trace_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("step", 0) != 0) throw IoError("trace " + path.string() + ": bad header");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = line.find(',');
    while (start != std::string::npos) {
      const std::size_t next = line.find(',', start + 1);
      const std::string_view field(line.data() + start + 1, (next == std::string::npos ? line.size() : next) - start - 1);
      double v = 0.0;
      auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc()) throw IoError("trace " + path.string() + ": bad value");
      row.push_back(v);
      start = next;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace smoothrl::envs
