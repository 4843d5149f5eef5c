#include "hwiener/harness/output.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace hwiener::harness {

std::string version_string() { return HWIENER_VERSION; }

const std::vector<std::string>& kernel_columns() {
  static const std::vector<std::string> cols{"t", "|z|", "u", "p_t", "est_tail_error"};
  return cols;
}

std::vector<std::string> sample_columns(int n) {
  std::vector<std::string> cols{"path_id", "time"};
  for (int i = 1; i <= n; ++i) {
    cols.push_back("x_" + std::to_string(i));
    cols.push_back("y_" + std::to_string(i));
  }
  cols.push_back("u");
  return cols;
}

const std::vector<std::string>& density_columns() {
  static const std::vector<std::string> cols{"r_lo", "r_hi", "u_lo", "u_hi", "hits_empty",
                                             "mass", "mass_stderr", "density", "density_stderr"};
  return cols;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_csv_header(std::ostream& out, const Provenance& prov, const std::vector<std::string>& columns) {
  out << "# tool: hwiener " << version_string() << "\n";
  out << "# subcommand: " << prov.subcommand << "\n";
  std::istringstream lines(prov.config.canonical());
  std::string line;
  while (std::getline(lines, line)) out << "# config: " << line << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << "\n";
}

void write_csv_row(std::ostream& out, const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << format_double(values[i]);
  out << "\n";
}

nlohmann::json provenance_record(const Provenance& prov) {
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [k, v] : prov.config.entries()) cfg[k] = v;
  return {{"record", "provenance"},
          {"tool", "hwiener"},
          {"version", version_string()},
          {"subcommand", prov.subcommand},
          {"config", cfg}};
}

void write_jsonl(std::ostream& out, const nlohmann::json& record) { out << record.dump() << "\n"; }

}  // namespace hwiener::harness
