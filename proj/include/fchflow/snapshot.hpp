#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fchflow/model.hpp"

namespace fchflow {

inline constexpr std::uint32_t kSnapshotVersion = 1;

// On-disk layout, little-endian throughout:
//   magic "FCHF" | version u32 | dim u32 | n u32 per axis | L f64 per axis |
//   t f64 | field_count u32 | per field: name_len u32 + name bytes |
//   payload: field_count blocks of prod(n) f64, row-major physical samples.
// The payload is representation-exact: the doubles written come back
// bitwise. The dealias mask is not part of the file; the loader's grid
// config supplies it.
struct SnapshotHeader {
  std::uint32_t version = kSnapshotVersion;
  int dim = 2;
  std::array<int, 3> n = {0, 0, 1};
  std::array<double, 3> length = {0.0, 0.0, 0.0};
  double t = 0.0;
  std::vector<std::string> fields;

  std::size_t points() const;  // samples per field
};

struct SnapshotData {
  SnapshotHeader header;
  std::vector<std::vector<double>> payload;  // one block per named field
};

// Writes phi and the velocity components ("phi", "u0", "u1"[, "u2"]) as
// physical samples. Atomic: the bytes land in path + ".tmp" and are
// renamed over path only when complete.
void write_snapshot(const std::string& path, const PhaseState& s);

// Header only; stops reading before the payload.
SnapshotHeader read_snapshot_header(const std::string& path);

// Full file with the payload doubles exactly as stored.
SnapshotData read_snapshot_raw(const std::string& path);

// Reconstructs a PhaseState: the payload's physical samples are analyzed
// back to the canonical spectral representation under the given dealias
// fraction, and t is taken from the header. Field names must be exactly
// the set write_snapshot emits.
PhaseState read_snapshot(const std::string& path, const ModelParams& p,
                         double dealias_fraction);

}  // namespace fchflow
