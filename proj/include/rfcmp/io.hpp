#pragma once

#include <chrono>
#include <ctime>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfcmp/krylov.hpp"
#include "rfcmp/mesh.hpp"

namespace rfcmp {

inline constexpr const char* kCsvSchemaVersion = "rfcmp-csv/1";

/// "# rfcmp-csv/1 <table>" plus an optional generation-time line.
inline std::string csv_preamble(const std::string& table, bool with_timestamp) {
  std::ostringstream os;
  os << "# " << kCsvSchemaVersion << ' ' << table << '\n';
  if (with_timestamp) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    os << "# generated " << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << '\n';
  }
  return os.str();
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

inline void check_written(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

inline std::string residual_csv(const SolveReport& report) {
  std::ostringstream os;
  os << "iteration,residual\n" << std::setprecision(10);
  for (std::size_t i = 0; i < report.residual_history.size(); ++i) os << i << ',' << report.residual_history[i] << '\n';
  return os.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  check_written(out, path);
}

/// Matrix Market coordinate dump of a real sparse matrix.
inline void write_matrix_market(const SparseRealMatrix& m, const std::string& path) {
  auto out = open_output(path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n' << std::setprecision(17);
  for (Index c = 0; c < m.outerSize(); ++c)
    for (SparseRealMatrix::InnerIterator it(m, c); it; ++it)
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
  check_written(out, path);
}

inline void write_matrix_market(const SparseIntMatrix& m, const std::string& path) {
  auto out = open_output(path);
  out << "%%MatrixMarket matrix coordinate integer general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  for (Index c = 0; c < m.outerSize(); ++c)
    for (SparseIntMatrix::InnerIterator it(m, c); it; ++it)
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
  check_written(out, path);
}

namespace detail {
inline void put_le_double(std::ofstream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}
inline double get_le_double(const unsigned char* b) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}
}  // namespace detail

/// Row-major little-endian complex128 dump with a JSON sidecar at path + ".json".
inline void write_dense_block(const ComplexMatrix& m, double k, const TriangleMesh& mesh, const std::string& path) {
  auto out = open_output(path);
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) {
      detail::put_le_double(out, m(r, c).real());
      detail::put_le_double(out, m(r, c).imag());
    }
  check_written(out, path);
  nlohmann::json side;
  side["rows"] = m.rows();
  side["cols"] = m.cols();
  side["k"] = k;
  side["layout"] = "row-major little-endian complex128";
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << mesh_hash(mesh);
  side["mesh_hash"] = hash.str();
  write_text(path + ".json", side.dump(2) + "\n");
}

inline ComplexMatrix read_dense_block(const std::string& path) {
  std::ifstream side(path + ".json");
  if (!side) throw IoError("missing sidecar '" + path + ".json'");
  nlohmann::json meta;
  try {
    side >> meta;
  } catch (const std::exception& e) {
    throw IoError(std::string("bad sidecar: ") + e.what());
  }
  const Index rows = meta.at("rows").get<Index>(), cols = meta.at("cols").get<Index>();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<unsigned char> buf(static_cast<std::size_t>(rows * cols * 16));
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) throw IoError("truncated dense block '" + path + "'");
  ComplexMatrix m(rows, cols);
  const unsigned char* p = buf.data();
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c, p += 16) m(r, c) = Complex(detail::get_le_double(p), detail::get_le_double(p + 8));
  return m;
}

}  // namespace rfcmp
