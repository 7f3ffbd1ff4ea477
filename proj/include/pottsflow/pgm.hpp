// Minimal PGM (P2/P5) reader and writer. Intensities are exposed as
// values scaled into [0,1] by the file's maxval.
#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "pottsflow/grid.hpp"

namespace pottsflow {

namespace detail {

// Skips whitespace and '#' comment lines between header tokens.
inline int next_header_int(std::istream& in, const std::string& path) {
  while (true) {
    const int ch = in.peek();
    if (ch == EOF) throw std::runtime_error("malformed PGM header (unexpected end): " + path);
    if (ch == '#') {
      std::string line;
      std::getline(in, line);
      continue;
    }
    if (std::isspace(ch)) {
      in.get();
      continue;
    }
    break;
  }
  long long v = 0;
  if (!(in >> v) || v < 0)
    throw std::runtime_error("malformed PGM header (bad integer): " + path);
  return static_cast<int>(v);
}

}  // namespace detail

template <typename Scalar = double>
ScalarField<Scalar> load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open PGM file: " + path);

  std::string magic;
  in >> magic;
  if (magic != "P2" && magic != "P5")
    throw std::runtime_error("unsupported PGM magic '" + magic + "' (want P2 or P5): " + path);

  const int width = detail::next_header_int(in, path);
  const int height = detail::next_header_int(in, path);
  const int maxval = detail::next_header_int(in, path);
  if (width < 1 || height < 1)
    throw std::runtime_error("malformed PGM header (bad dimensions): " + path);
  if (maxval < 1 || maxval > 65535)
    throw std::runtime_error("malformed PGM header (maxval out of range): " + path);

  ScalarField<Scalar> f(height, width);
  if (magic == "P2") {
    for (int i = 0; i < height; ++i)
      for (int j = 0; j < width; ++j) {
        long long v;
        if (!(in >> v)) throw std::runtime_error("truncated PGM payload: " + path);
        if (v < 0 || v > maxval)
          throw std::runtime_error("PGM sample out of range: " + path);
        f(i, j) = Scalar(v) / Scalar(maxval);
      }
  } else {
    in.get();  // single whitespace after maxval
    const int bytes = maxval > 255 ? 2 : 1;
    for (int i = 0; i < height; ++i)
      for (int j = 0; j < width; ++j) {
        unsigned char buf[2] = {0, 0};
        in.read(reinterpret_cast<char*>(buf), bytes);
        if (!in) throw std::runtime_error("truncated PGM payload: " + path);
        const unsigned v = bytes == 2 ? (unsigned(buf[0]) << 8) | buf[1] : buf[0];
        if (v > unsigned(maxval)) throw std::runtime_error("PGM sample out of range: " + path);
        f(i, j) = Scalar(v) / Scalar(maxval);
      }
  }
  return f;
}

/// Writes values in [0,1] as binary P5 with the given maxval.
template <typename Scalar>
void save_pgm(const ScalarField<Scalar>& f, const std::string& path, int maxval = 255) {
  if (maxval < 1 || maxval > 65535) throw std::invalid_argument("save_pgm: bad maxval");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write PGM file: " + path);
  out << "P5\n" << f.cols() << " " << f.rows() << "\n" << maxval << "\n";
  const int bytes = maxval > 255 ? 2 : 1;
  for (Eigen::Index i = 0; i < f.rows(); ++i)
    for (Eigen::Index j = 0; j < f.cols(); ++j) {
      double v = static_cast<double>(f(i, j));
      v = v < 0 ? 0 : (v > 1 ? 1 : v);
      const unsigned s = static_cast<unsigned>(std::lround(v * maxval));
      if (bytes == 2) {
        const unsigned char hi = static_cast<unsigned char>(s >> 8);
        const unsigned char lo = static_cast<unsigned char>(s & 0xff);
        out.put(static_cast<char>(hi));
        out.put(static_cast<char>(lo));
      } else {
        out.put(static_cast<char>(static_cast<unsigned char>(s)));
      }
    }
  if (!out) throw std::runtime_error("failed writing PGM file: " + path);
}

/// Label map as a PGM: labels 0..n-1 are spread evenly over 0..255.
inline void save_label_pgm(const Eigen::ArrayXXi& labels, int n, const std::string& path) {
  if (n < 2) throw std::invalid_argument("save_label_pgm: need n >= 2");
  ScalarField<double> f(labels.rows(), labels.cols());
  for (Eigen::Index i = 0; i < labels.rows(); ++i)
    for (Eigen::Index j = 0; j < labels.cols(); ++j)
      f(i, j) = static_cast<double>(labels(i, j)) / static_cast<double>(n - 1);
  save_pgm(f, path, 255);
}

}  // namespace pottsflow
