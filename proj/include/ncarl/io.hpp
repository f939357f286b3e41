#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ncarl/errors.hpp"
#include "ncarl/masked.hpp"

namespace ncarl::io {

/// Formats with 17 significant digits, enough for a lossless double round trip.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Writes via a temporary file in the same directory, then renames into place.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw io_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw io_error("rename failed for " + path.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline bool is_nan_token(const std::string& s) {
  if (s.size() != 3) return false;
  return std::tolower(static_cast<unsigned char>(s[0])) == 'n' &&
         std::tolower(static_cast<unsigned char>(s[1])) == 'a' &&
         std::tolower(static_cast<unsigned char>(s[2])) == 'n';
}

inline double parse_double(const std::string& token, const std::filesystem::path& path) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0')
    throw io_error("bad number '" + token + "' in " + path.string());
  return v;
}

}  // namespace detail

// --- dense CSV: row-major, empty cell or literal NaN marks an unobserved entry ---

inline MaskedMatrix read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open: " + path.string());
  std::vector<std::vector<std::pair<double, bool>>> rows;  // (value, observed)
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    std::vector<std::pair<double, bool>> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const std::string token = detail::trim(cell);
      if (token.empty() || detail::is_nan_token(token))
        row.emplace_back(0.0, false);
      else
        row.emplace_back(detail::parse_double(token, path), true);
    }
    if (!line.empty() && line.back() == ',') row.emplace_back(0.0, false);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw io_error("empty CSV: " + path.string());
  const std::size_t n = rows[0].size();
  for (const auto& r : rows)
    if (r.size() != n) throw io_error("ragged CSV: " + path.string());

  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
  Eigen::MatrixXd mask(values.rows(), values.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < n; ++j) {
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].first;
      mask(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].second ? 1.0 : 0.0;
    }
  return MaskedMatrix::from_values(std::move(values), std::move(mask));
}

inline void write_csv(const std::filesystem::path& path, const Eigen::MatrixXd& X) {
  std::string out;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      if (j) out += ',';
      out += format_real(X(i, j));
    }
    out += '\n';
  }
  atomic_write(path, out);
}

inline void write_csv(const std::filesystem::path& path, const MaskedMatrix& masked) {
  std::string out;
  for (Eigen::Index i = 0; i < masked.rows(); ++i) {
    for (Eigen::Index j = 0; j < masked.cols(); ++j) {
      if (j) out += ',';
      out += masked.observed(i, j) ? format_real(masked.values(i, j)) : "NaN";
    }
    out += '\n';
  }
  atomic_write(path, out);
}

// --- coordinate triplets: header "coo m n", then 0-based "i,j,value" lines ---

inline MaskedMatrix read_coo(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw io_error("empty COO file: " + path.string());
  std::stringstream header(line);
  std::string magic;
  long m = 0;
  long n = 0;
  header >> magic >> m >> n;
  if (magic != "coo" || m <= 0 || n <= 0)
    throw io_error("bad COO header in " + path.string());

  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(m, n);
  Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(m, n);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string a;
    std::string b;
    std::string c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
      throw io_error("bad COO line '" + line + "' in " + path.string());
    const long i = std::stol(detail::trim(a));
    const long j = std::stol(detail::trim(b));
    if (i < 0 || i >= m || j < 0 || j >= n)
      throw io_error("COO index out of range in " + path.string());
    values(i, j) = detail::parse_double(detail::trim(c), path);
    mask(i, j) = 1.0;
  }
  return MaskedMatrix::from_values(std::move(values), std::move(mask));
}

inline void write_coo(const std::filesystem::path& path, const MaskedMatrix& masked) {
  std::string out = "coo " + std::to_string(masked.rows()) + " " + std::to_string(masked.cols()) + "\n";
  for (Eigen::Index i = 0; i < masked.rows(); ++i)
    for (Eigen::Index j = 0; j < masked.cols(); ++j)
      if (masked.observed(i, j))
        out += std::to_string(i) + "," + std::to_string(j) + "," +
               format_real(masked.values(i, j)) + "\n";
  atomic_write(path, out);
}

// --- netpbm images; gray values normalized to [0,1] by maxval ---

struct Image {
  Eigen::MatrixXd gray;  // height x width, in [0,1]
  int maxval = 255;
  bool binary = true;  // P5 vs P2
};

struct ColorImage {
  Eigen::MatrixXd r, g, b;  // in [0,1]
  int maxval = 255;
  bool binary = true;  // P6 vs P3
};

namespace detail {

// Reads the next whitespace-separated token, skipping '#' comments.
inline std::string next_pnm_token(std::istream& in) {
  std::string token;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    token += static_cast<char>(c);
    c = in.get();
  }
  return token;
}

inline long next_pnm_int(std::istream& in, const std::filesystem::path& path) {
  const std::string token = next_pnm_token(in);
  if (token.empty()) throw io_error("truncated netpbm header: " + path.string());
  return std::stol(token);
}

inline double read_sample(std::istream& in, bool binary, int maxval,
                          const std::filesystem::path& path) {
  if (binary) {
    if (maxval < 256) {
      const int c = in.get();
      if (c == EOF) throw io_error("truncated pixel data: " + path.string());
      return static_cast<double>(c) / maxval;
    }
    const int hi = in.get();
    const int lo = in.get();
    if (hi == EOF || lo == EOF) throw io_error("truncated pixel data: " + path.string());
    return static_cast<double>(hi * 256 + lo) / maxval;
  }
  return static_cast<double>(next_pnm_int(in, path)) / maxval;
}

inline void append_sample(std::string& out, double v, bool binary, int maxval, bool last_in_row) {
  const long raw = std::lround(std::clamp(v, 0.0, 1.0) * maxval);
  if (binary) {
    if (maxval < 256) {
      out += static_cast<char>(raw);
    } else {
      out += static_cast<char>(raw / 256);
      out += static_cast<char>(raw % 256);
    }
  } else {
    out += std::to_string(raw);
    out += last_in_row ? '\n' : ' ';
  }
}

}  // namespace detail

inline Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open: " + path.string());
  const std::string magic = detail::next_pnm_token(in);
  if (magic != "P2" && magic != "P5") throw io_error("not a PGM file: " + path.string());
  Image img;
  img.binary = magic == "P5";
  const long width = detail::next_pnm_int(in, path);
  const long height = detail::next_pnm_int(in, path);
  img.maxval = static_cast<int>(detail::next_pnm_int(in, path));
  if (width <= 0 || height <= 0 || img.maxval <= 0 || img.maxval > 65535)
    throw io_error("bad PGM dimensions: " + path.string());
  // The token reader already consumed the single whitespace after maxval.

  img.gray.resize(height, width);
  for (long i = 0; i < height; ++i)
    for (long j = 0; j < width; ++j)
      img.gray(i, j) = detail::read_sample(in, img.binary, img.maxval, path);
  return img;
}

inline void write_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& gray,
                      int maxval = 255, bool binary = true) {
  std::string out = binary ? "P5\n" : "P2\n";
  out += std::to_string(gray.cols()) + " " + std::to_string(gray.rows()) + "\n" +
         std::to_string(maxval) + "\n";
  for (Eigen::Index i = 0; i < gray.rows(); ++i)
    for (Eigen::Index j = 0; j < gray.cols(); ++j)
      detail::append_sample(out, gray(i, j), binary, maxval, j + 1 == gray.cols());
  atomic_write(path, out);
}

inline ColorImage read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open: " + path.string());
  const std::string magic = detail::next_pnm_token(in);
  if (magic != "P3" && magic != "P6") throw io_error("not a PPM file: " + path.string());
  ColorImage img;
  img.binary = magic == "P6";
  const long width = detail::next_pnm_int(in, path);
  const long height = detail::next_pnm_int(in, path);
  img.maxval = static_cast<int>(detail::next_pnm_int(in, path));
  if (width <= 0 || height <= 0 || img.maxval <= 0 || img.maxval > 65535)
    throw io_error("bad PPM dimensions: " + path.string());

  img.r.resize(height, width);
  img.g.resize(height, width);
  img.b.resize(height, width);
  for (long i = 0; i < height; ++i)
    for (long j = 0; j < width; ++j) {
      img.r(i, j) = detail::read_sample(in, img.binary, img.maxval, path);
      img.g(i, j) = detail::read_sample(in, img.binary, img.maxval, path);
      img.b(i, j) = detail::read_sample(in, img.binary, img.maxval, path);
    }
  return img;
}

inline void write_ppm(const std::filesystem::path& path, const ColorImage& img) {
  std::string out = img.binary ? "P6\n" : "P3\n";
  out += std::to_string(img.r.cols()) + " " + std::to_string(img.r.rows()) + "\n" +
         std::to_string(img.maxval) + "\n";
  for (Eigen::Index i = 0; i < img.r.rows(); ++i)
    for (Eigen::Index j = 0; j < img.r.cols(); ++j) {
      detail::append_sample(out, img.r(i, j), img.binary, img.maxval, false);
      detail::append_sample(out, img.g(i, j), img.binary, img.maxval, false);
      detail::append_sample(out, img.b(i, j), img.binary, img.maxval, j + 1 == img.r.cols());
    }
  atomic_write(path, out);
}

/// Standard luma weights; channels are already normalized by maxval.
inline Eigen::MatrixXd rgb_to_gray(const ColorImage& img) {
  return 0.299 * img.r + 0.587 * img.g + 0.114 * img.b;
}

}  // namespace ncarl::io
