#include "fchflow/snapshot.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "fchflow/errors.hpp"
#include "fchflow/spectral.hpp"

static_assert(std::endian::native == std::endian::little,
              "snapshot files are little-endian; big-endian hosts need byte "
              "swaps this build does not provide");

namespace fchflow {
namespace {

constexpr char kMagic[4] = {'F', 'C', 'H', 'F'};

void put_bytes(std::ofstream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void put_u32(std::ofstream& out, std::uint32_t v) { put_bytes(out, &v, 4); }
void put_f64(std::ofstream& out, double v) { put_bytes(out, &v, 8); }

void get_bytes(std::ifstream& in, void* p, std::size_t n,
               const char* what) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw TruncatedError(std::string("snapshot ") + what + " truncated");
}

std::uint32_t get_u32(std::ifstream& in, const char* what) {
  std::uint32_t v = 0;
  get_bytes(in, &v, 4, what);
  return v;
}

double get_f64(std::ifstream& in, const char* what) {
  double v = 0.0;
  get_bytes(in, &v, 8, what);
  return v;
}

SnapshotHeader read_header(std::ifstream& in) {
  char magic[4] = {};
  get_bytes(in, magic, 4, "header");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw BadMagicError("snapshot magic mismatch: expected FCHF");
  SnapshotHeader h;
  h.version = get_u32(in, "header");
  if (h.version != kSnapshotVersion)
    throw BadVersionError("unsupported snapshot version " +
                          std::to_string(h.version) + " (this build reads " +
                          std::to_string(kSnapshotVersion) + ")");
  const std::uint32_t dim = get_u32(in, "header");
  if (dim != 2 && dim != 3)
    throw IoError("corrupt snapshot header: dim = " + std::to_string(dim));
  h.dim = static_cast<int>(dim);
  h.n = {1, 1, 1};
  for (int a = 0; a < h.dim; ++a) {
    const std::uint32_t n = get_u32(in, "header");
    if (n < 2 || n > (1u << 20))
      throw IoError("corrupt snapshot header: n = " + std::to_string(n));
    h.n[a] = static_cast<int>(n);
  }
  for (int a = 0; a < h.dim; ++a) h.length[a] = get_f64(in, "header");
  h.t = get_f64(in, "header");
  const std::uint32_t count = get_u32(in, "header");
  if (count == 0 || count > 16)
    throw IoError("corrupt snapshot header: field count " +
                  std::to_string(count));
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t len = get_u32(in, "header");
    if (len == 0 || len > 256)
      throw IoError("corrupt snapshot header: field name length " +
                    std::to_string(len));
    std::string name(len, '\0');
    get_bytes(in, name.data(), len, "header");
    h.fields.push_back(std::move(name));
  }
  return h;
}

}  // namespace

std::size_t SnapshotHeader::points() const {
  std::size_t p = 1;
  for (int a = 0; a < dim; ++a) p *= static_cast<std::size_t>(n[a]);
  return p;
}

void write_snapshot(const std::string& path, const PhaseState& s) {
  const Grid& g = s.phi().grid();
  const int dim = g.dim();

  std::vector<std::pair<std::string, Field>> fields;
  fields.emplace_back("phi", to_physical(s.phi()));
  const VectorField u = to_physical(s.u());
  for (int c = 0; c < dim; ++c)
    fields.emplace_back("u" + std::to_string(c), u[c]);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write snapshot: " + tmp);
    put_bytes(out, kMagic, 4);
    put_u32(out, kSnapshotVersion);
    put_u32(out, static_cast<std::uint32_t>(dim));
    for (int a = 0; a < dim; ++a)
      put_u32(out, static_cast<std::uint32_t>(g.n(a)));
    for (int a = 0; a < dim; ++a) put_f64(out, g.length(a));
    put_f64(out, s.t);
    put_u32(out, static_cast<std::uint32_t>(fields.size()));
    for (const auto& [name, field] : fields) {
      put_u32(out, static_cast<std::uint32_t>(name.size()));
      put_bytes(out, name.data(), name.size());
    }
    for (const auto& [name, field] : fields)
      put_bytes(out, field.phys().data(), field.phys().size() * 8);
    out.flush();
    if (!out) throw IoError("write failed on snapshot: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw IoError("cannot move snapshot into place: " + path + " (" +
                  ec.message() + ")");
}

SnapshotHeader read_snapshot_header(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read snapshot: " + path);
  return read_header(in);
}

SnapshotData read_snapshot_raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read snapshot: " + path);
  SnapshotData d;
  d.header = read_header(in);
  const std::size_t points = d.header.points();
  for (std::size_t f = 0; f < d.header.fields.size(); ++f) {
    std::vector<double> block(points);
    get_bytes(in, block.data(), points * 8, "payload");
    d.payload.push_back(std::move(block));
  }
  return d;
}

PhaseState read_snapshot(const std::string& path, const ModelParams& p,
                         double dealias_fraction) {
  const SnapshotData d = read_snapshot_raw(path);

  std::vector<std::string> expect = {"phi", "u0", "u1"};
  if (d.header.dim == 3) expect.push_back("u2");
  if (d.header.fields != expect)
    throw IoError("snapshot field set is not a phase state: " + path);

  GridConfig gc;
  gc.dim = d.header.dim;
  gc.n = d.header.n;
  if (gc.dim == 2) gc.n[2] = 1;
  gc.length = d.header.length;
  if (gc.dim == 2) gc.length[2] = kTwoPi;
  gc.dealias_fraction = dealias_fraction;
  const Grid g(gc);

  Field phi(g, Repr::Physical);
  phi.phys() = d.payload[0];
  VectorField u(g, Repr::Physical);
  for (int c = 0; c < gc.dim; ++c) u[c].phys() = d.payload[1 + c];

  return PhaseState::create(p, phi, u, d.header.t);
}

}  // namespace fchflow
