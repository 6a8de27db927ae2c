#include "ikr/image_io.hpp"

#include <zlib.h>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace ikr {

namespace {

std::uint8_t to_byte(double v) {
  double c = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
  return static_cast<std::uint8_t>(c * 255.0 + 0.5);
}

}  // namespace

void write_pgm(const std::string& path, const Matrix& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pgm: cannot open " + path);
  out << "P5\n" << image.cols() << " " << image.rows() << "\n255\n";
  for (Eigen::Index i = 0; i < image.rows(); ++i)
    for (Eigen::Index j = 0; j < image.cols(); ++j)
      out.put(static_cast<char>(to_byte(image(i, j))));
}

Matrix read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_pgm: cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P2")
    throw std::runtime_error("read_pgm: unsupported format in " + path);
  auto next_token = [&in]() {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
    throw std::runtime_error("read_pgm: truncated header");
  };
  int cols = std::stoi(next_token());
  int rows = std::stoi(next_token());
  int maxval = std::stoi(next_token());
  if (maxval <= 0 || maxval > 255)
    throw std::runtime_error("read_pgm: only 8-bit images supported");
  Matrix image(rows, cols);
  if (magic == "P5") {
    in.get();  // single whitespace after maxval
    std::vector<char> buf(static_cast<std::size_t>(rows) * cols);
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!in) throw std::runtime_error("read_pgm: truncated data");
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j)
        image(i, j) =
            static_cast<std::uint8_t>(buf[std::size_t(i) * cols + j]) /
            double(maxval);
  } else {
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) {
        int v;
        in >> v;
        image(i, j) = v / double(maxval);
      }
  }
  return image;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back((v >> 24) & 0xff);
  out.push_back((v >> 16) & 0xff);
  out.push_back((v >> 8) & 0xff);
  out.push_back(v & 0xff);
}

void put_chunk(std::vector<std::uint8_t>& out, const char type[4],
               const std::vector<std::uint8_t>& data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  std::size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  std::uint32_t c = crc32(0L, Z_NULL, 0);
  c = crc32(c, out.data() + start, static_cast<uInt>(4 + data.size()));
  put_u32(out, c);
}

}  // namespace

void write_png(const std::string& path, const Matrix& image) {
  const int h = static_cast<int>(image.rows());
  const int w = static_cast<int>(image.cols());

  // Raw scanlines, filter byte 0 per row, grayscale 8-bit.
  std::vector<std::uint8_t> raw;
  raw.reserve(std::size_t(h) * (w + 1));
  for (int i = 0; i < h; ++i) {
    raw.push_back(0);
    for (int j = 0; j < w; ++j) raw.push_back(to_byte(image(i, j)));
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> compressed(bound);
  if (compress2(compressed.data(), &bound, raw.data(),
                static_cast<uLong>(raw.size()), 9) != Z_OK)
    throw std::runtime_error("write_png: deflate failed");
  compressed.resize(bound);

  std::vector<std::uint8_t> png = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<std::uint8_t> ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(w));
  put_u32(ihdr, static_cast<std::uint32_t>(h));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(0);   // grayscale
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // no interlace
  put_chunk(png, "IHDR", ihdr);
  put_chunk(png, "IDAT", compressed);
  put_chunk(png, "IEND", {});

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_png: cannot open " + path);
  out.write(reinterpret_cast<const char*>(png.data()),
            static_cast<std::streamsize>(png.size()));
}

void write_history_csv(const std::string& path, const SolveHistory& history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_history_csv: cannot open " + path);
  out << "total_iter,outer_iter,inner_iter,lambda,inexact_residual_norm,"
         "gap_bound,accumulated_budget,rre_x,rre_y,sigma1,sigma2,rho,gamma,"
         "restarted,objective_exact,objective_inexact,x_rel_change\n";
  char buf[512];
  for (const IterationRecord& r : history.records) {
    std::snprintf(buf, sizeof(buf),
                  "%d,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g,%d,%.17g,%.17g,%.17g\n",
                  r.total_iter, r.outer_iter, r.inner_iter, r.lambda,
                  r.inexact_residual_norm, r.gap_bound, r.accumulated_budget,
                  r.rre_x, r.rre_y, r.sigma1, r.sigma2, r.rho, r.gamma,
                  r.restarted ? 1 : 0, r.objective_exact, r.objective_inexact,
                  r.x_rel_change);
    out << buf;
  }
}

}  // namespace ikr
