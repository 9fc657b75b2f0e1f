#ifndef DISPERSIM_IO_HPP
#define DISPERSIM_IO_HPP

#include <filesystem>
#include <variant>

#include "dispersim/grid.hpp"

namespace dispersim {

struct SnapshotError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint16_t kSnapshotVersion = 1;

/// Binary snapshot: magic "DSPF", version u16, n u8, spinor flag u8, N u32,
/// L f64, then N^n (x2 if spinor) complex values as little-endian f64 pairs,
/// axis 1 fastest.
void emit_snapshot(const ComplexField& f, const std::filesystem::path& path);
void emit_snapshot(const SpinorField& s, const std::filesystem::path& path);

std::variant<ComplexField, SpinorField> load_snapshot(
    const std::filesystem::path& path);

}  // namespace dispersim

#endif
