#pragma once

// Output formats. Every file starts with provenance: CSV files with '#'
// comment lines, JSON-lines files with a leading {"record": "provenance"} line.
//
// Fixed CSV columns:
//   kernel   t,|z|,u,p_t,est_tail_error
//   sample   path_id,time,x_1,y_1,...,x_n,y_n,u
//   density  r_lo,r_hi,u_lo,u_hi,hits_empty,mass,mass_stderr,density,density_stderr
// JSON-lines records carry a "record" field naming their kind.

#include "hwiener/harness/run_config.hpp"

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace hwiener::harness {

std::string version_string();

struct Provenance {
  std::string subcommand;
  RunConfig config;
};

const std::vector<std::string>& kernel_columns();
std::vector<std::string> sample_columns(int n);
const std::vector<std::string>& density_columns();

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

void write_csv_header(std::ostream& out, const Provenance& prov, const std::vector<std::string>& columns);
void write_csv_row(std::ostream& out, const std::vector<double>& values);

nlohmann::json provenance_record(const Provenance& prov);
void write_jsonl(std::ostream& out, const nlohmann::json& record);

}  // namespace hwiener::harness
