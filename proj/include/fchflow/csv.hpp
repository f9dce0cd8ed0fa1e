#pragma once

#include <fstream>
#include <string>

#include "fchflow/diagnostics.hpp"

namespace fchflow {

// Versioned column contract of diagnostics.csv; changing it is a format
// break, so tests pin the exact string.
std::string diagnostics_csv_header();
std::string diagnostics_csv_row(const DiagnosticsRecord& r);

std::string twin_csv_header();
std::string twin_csv_row(const TwinRecord& r);

// Line-oriented writer that owns its handle; the header goes out on open
// and every row is flushed so partial output survives a failed run.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& header);
  void row(const std::string& line);

 private:
  std::ofstream out_;
  std::string path_;
};

}  // namespace fchflow
