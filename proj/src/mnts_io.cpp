#include "mnt/mnts_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace mnt {

namespace {

static_assert(std::endian::native == std::endian::little,
              "MNTS serialization assumes a little-endian host");

template <typename T>
void put(std::ofstream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw Error("MNTS: truncated file");
  return value;
}

}  // namespace

void write_mnts(const std::string& path, const ScatteringMatrix& S) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("MNTS: cannot open for writing: " + path);

  os.write("MNTS", 4);
  put<std::uint32_t>(os, kMntsVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(S.partition().n_tx));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(S.partition().n_rx));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(S.partition().n_ris));
  put<double>(os, S.kappa());

  const Matrix& M = S.matrix();
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      put<double>(os, M(i, j).real());
      put<double>(os, M(i, j).imag());
    }
  if (!os) throw Error("MNTS: write failed: " + path);
}

ScatteringMatrix read_mnts(const std::string& path, bool enforce_passivity) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("MNTS: cannot open: " + path);

  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "MNTS", 4) != 0) throw Error("MNTS: bad magic in " + path);
  const auto version = get<std::uint32_t>(is);
  if (version != kMntsVersion)
    throw Error("MNTS: unsupported version " + std::to_string(version));

  PortPartition part;
  part.n_tx = static_cast<int>(get<std::uint32_t>(is));
  part.n_rx = static_cast<int>(get<std::uint32_t>(is));
  part.n_ris = static_cast<int>(get<std::uint32_t>(is));
  const double kappa = get<double>(is);

  const int n = part.total();
  Matrix M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double re = get<double>(is);
      const double im = get<double>(is);
      M(i, j) = Complex(re, im);
    }
  return ScatteringMatrix(part, std::move(M), kappa, enforce_passivity);
}

}  // namespace mnt
