#include "lagfilt/frame_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>

namespace lagfilt {

namespace {

constexpr char kMagic[4] = {'L', 'A', 'G', 'F'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& buf, std::uint32_t v) {
  buf.push_back(static_cast<char>(v & 0xff));
  buf.push_back(static_cast<char>((v >> 8) & 0xff));
  buf.push_back(static_cast<char>((v >> 16) & 0xff));
  buf.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_frames(const std::string& path, const std::vector<ArrayXXd>& frames) {
  if (frames.empty()) throw io_error("refusing to write an empty frame file: " + path);
  const Eigen::Index h = frames.front().rows(), w = frames.front().cols();
  for (const ArrayXXd& f : frames)
    if (f.rows() != h || f.cols() != w)
      throw io_error("frame dimensions are not uniform: " + path);

  std::ofstream os(path, std::ios::binary);
  if (!os) throw io_error("cannot open for writing: " + path);
  std::string buf;
  buf.reserve(20 + frames.size() * static_cast<std::size_t>(h) * w * 4);
  buf.append(kMagic, 4);
  put_u32(buf, kVersion);
  put_u32(buf, static_cast<std::uint32_t>(w));
  put_u32(buf, static_cast<std::uint32_t>(h));
  put_u32(buf, static_cast<std::uint32_t>(frames.size()));
  for (const ArrayXXd& f : frames) {
    for (Eigen::Index y = 0; y < h; ++y)
      for (Eigen::Index x = 0; x < w; ++x)
        put_u32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(f(y, x))));
  }
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw io_error("short write: " + path);
}

std::vector<ArrayXXd> read_frames(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw io_error("cannot open for reading: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || !std::equal(magic, magic + 4, kMagic))
    throw io_error("not a frame file (bad magic): " + path);
  const std::uint32_t version = get_u32(is);
  if (version != kVersion) throw io_error("unsupported frame file version: " + path);
  const std::uint32_t w = get_u32(is);
  const std::uint32_t h = get_u32(is);
  const std::uint32_t count = get_u32(is);
  if (!is || w == 0 || h == 0 || count == 0 || w > (1u << 20) || h > (1u << 20))
    throw io_error("implausible frame file header: " + path);

  std::vector<ArrayXXd> frames;
  frames.reserve(count);
  std::vector<char> raw(static_cast<std::size_t>(w) * h * 4);
  for (std::uint32_t n = 0; n < count; ++n) {
    is.read(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (!is) throw io_error("truncated frame file: " + path);
    ArrayXXd f(h, w);
    const unsigned char* b = reinterpret_cast<const unsigned char*>(raw.data());
    for (std::uint32_t y = 0; y < h; ++y) {
      for (std::uint32_t x = 0; x < w; ++x) {
        const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) |
                                   (static_cast<std::uint32_t>(b[1]) << 8) |
                                   (static_cast<std::uint32_t>(b[2]) << 16) |
                                   (static_cast<std::uint32_t>(b[3]) << 24);
        f(y, x) = static_cast<double>(std::bit_cast<float>(bits));
        b += 4;
      }
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

void write_pgm(const std::string& path, const ArrayXXd& frame) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw io_error("cannot open for writing: " + path);
  const double lo = frame.minCoeff(), hi = frame.maxCoeff();
  const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
  os << "P5\n" << frame.cols() << " " << frame.rows() << "\n255\n";
  std::string buf;
  buf.reserve(static_cast<std::size_t>(frame.size()));
  for (Eigen::Index y = 0; y < frame.rows(); ++y)
    for (Eigen::Index x = 0; x < frame.cols(); ++x)
      buf.push_back(static_cast<char>(
          static_cast<unsigned char>(std::clamp((frame(y, x) - lo) * scale, 0.0, 255.0))));
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw io_error("short write: " + path);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path);
  if (!os) throw io_error("cannot open for writing: " + path);
  for (std::size_t i = 0; i < header.size(); ++i)
    os << (i ? "," : "") << header[i];
  os << "\n";
  char num[64];
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw io_error("csv row width mismatch: " + path);
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(num, sizeof num, "%.17g", row[i]);
      os << (i ? "," : "") << num;
    }
    os << "\n";
  }
  if (!os) throw io_error("short write: " + path);
}

}  // namespace lagfilt
