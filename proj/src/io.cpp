#include "dispersim/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace dispersim {

namespace {

static_assert(std::endian::native == std::endian::little,
              "snapshot writer assumes a little-endian host");

constexpr char kMagic[4] = {'D', 'S', 'P', 'F'};

void write_header(std::ofstream& os, const Grid& g, bool spinor) {
  os.write(kMagic, 4);
  std::uint16_t ver = kSnapshotVersion;
  std::uint8_t n = static_cast<std::uint8_t>(g.dim());
  std::uint8_t sp = spinor ? 1 : 0;
  std::uint32_t N = static_cast<std::uint32_t>(g.points_per_axis());
  double L = g.box_length();
  os.write(reinterpret_cast<const char*>(&ver), sizeof ver);
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  os.write(reinterpret_cast<const char*>(&sp), sizeof sp);
  os.write(reinterpret_cast<const char*>(&N), sizeof N);
  os.write(reinterpret_cast<const char*>(&L), sizeof L);
}

void write_field(std::ofstream& os, const ComplexField& f) {
  // std::complex<double> is layout-compatible with double[2] (re, im).
  os.write(reinterpret_cast<const char*>(f.values().data()),
           static_cast<std::streamsize>(f.size() * sizeof(cplx)));
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw SnapshotError("cannot open " + path.string() + " for writing");
  return os;
}

}  // namespace

void emit_snapshot(const ComplexField& f, const std::filesystem::path& path) {
  auto os = open_out(path);
  write_header(os, f.grid(), false);
  write_field(os, f);
  if (!os) throw SnapshotError("short write to " + path.string());
}

void emit_snapshot(const SpinorField& s, const std::filesystem::path& path) {
  auto os = open_out(path);
  write_header(os, s.grid(), true);
  write_field(os, s.up);
  write_field(os, s.down);
  if (!os) throw SnapshotError("short write to " + path.string());
}

std::variant<ComplexField, SpinorField> load_snapshot(
    const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw SnapshotError("cannot open " + path.string());

  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw SnapshotError(path.string() + ": bad magic");
  std::uint16_t ver;
  std::uint8_t n, sp;
  std::uint32_t N;
  double L;
  is.read(reinterpret_cast<char*>(&ver), sizeof ver);
  is.read(reinterpret_cast<char*>(&n), sizeof n);
  is.read(reinterpret_cast<char*>(&sp), sizeof sp);
  is.read(reinterpret_cast<char*>(&N), sizeof N);
  is.read(reinterpret_cast<char*>(&L), sizeof L);
  if (!is) throw SnapshotError(path.string() + ": truncated header");
  if (ver != kSnapshotVersion)
    throw SnapshotError(path.string() + ": unsupported version " +
                        std::to_string(ver));

  GridPtr grid = make_grid(n, N, L);
  auto read_field = [&]() {
    ComplexField f(grid);
    is.read(reinterpret_cast<char*>(f.values().data()),
            static_cast<std::streamsize>(f.size() * sizeof(cplx)));
    if (!is) throw SnapshotError(path.string() + ": truncated payload");
    return f;
  };
  if (sp == 0) return read_field();
  ComplexField up = read_field();
  ComplexField down = read_field();
  return SpinorField{std::move(up), std::move(down)};
}

}  // namespace dispersim
