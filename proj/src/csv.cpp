#include "fchflow/csv.hpp"

#include <cstdio>

#include "fchflow/errors.hpp"

namespace fchflow {
namespace {

void append(std::string& line, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  if (!line.empty()) line += ',';
  line += buf;
}

}  // namespace

std::string diagnostics_csv_header() {
  return "t,mass,kinetic,elastic,total,dissipation,energy_residual,mu_mean,"
         "u_l4,u_l6,u_linf,gradu_l2,gradu_l3,gradu_l6,"
         "int_u_l4_q8,int_u_l6_q4,int_u_linf_q2,int_gradu_l2_q4,"
         "int_gradu_l3_q2,lambda,h_a_integral";
}

std::string diagnostics_csv_row(const DiagnosticsRecord& r) {
  std::string line;
  append(line, r.t);
  append(line, r.mass);
  append(line, r.kinetic);
  append(line, r.elastic);
  append(line, r.total);
  append(line, r.dissipation);
  append(line, r.energy_residual);
  append(line, r.mu_mean);
  append(line, r.norms.u_l4);
  append(line, r.norms.u_l6);
  append(line, r.norms.u_linf);
  append(line, r.norms.gradu_l2);
  append(line, r.norms.gradu_l3);
  append(line, r.norms.gradu_l6);
  append(line, r.int_u_l4_q8);
  append(line, r.int_u_l6_q4);
  append(line, r.int_u_linf_q2);
  append(line, r.int_gradu_l2_q4);
  append(line, r.int_gradu_l3_q2);
  append(line, r.lambda);
  append(line, r.h_a_integral);
  return line;
}

std::string twin_csv_header() { return "t,H,h_a,envelope"; }

std::string twin_csv_row(const TwinRecord& r) {
  std::string line;
  append(line, r.t);
  append(line, r.H);
  append(line, r.h_a);
  append(line, r.envelope);
  return line;
}

CsvWriter::CsvWriter(const std::string& path, const std::string& header)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
  if (!out_) throw IoError("cannot write csv: " + path);
  out_ << header << '\n';
  out_.flush();
}

void CsvWriter::row(const std::string& line) {
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw IoError("write failed on csv: " + path_);
}

}  // namespace fchflow
