#pragma once

#include <string>

#include "mnt/ensemble.hpp"

namespace mnt {

// "MNTS" container: magic, version u32, N_T/N_R/N_S u32, kappa f64, then
// N^2 complex entries as little-endian f64 pairs, row-major.
inline constexpr std::uint32_t kMntsVersion = 1;

void write_mnts(const std::string& path, const ScatteringMatrix& S);

/// Reads a container written by write_mnts. Passivity is re-checked only when
/// enforce_passivity is set (files produced in relaxed mode stay loadable).
ScatteringMatrix read_mnts(const std::string& path, bool enforce_passivity = false);

}  // namespace mnt
