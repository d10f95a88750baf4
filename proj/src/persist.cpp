#include <zlib.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "prockit/error.hpp"
#include "prockit/textindex.hpp"

namespace prockit::persist {

namespace {

std::string crc_hex(std::string_view data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  std::size_t off = 0;
  while (off < data.size()) {
    const std::size_t n = std::min<std::size_t>(data.size() - off, 1u << 30);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data.data() + off),
                static_cast<uInt>(n));
    off += n;
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

}  // namespace

std::string seal(std::string body, std::string_view magic) {
  std::string out;
  out.reserve(body.size() + magic.size() + 32);
  out.append(magic);
  out.push_back('\n');
  out += body;
  const std::string crc = crc_hex(out);
  out += "checksum ";
  out += crc;
  out.push_back('\n');
  return out;
}

std::vector<std::string> open(std::string_view data, std::string_view magic) {
  if (data.size() < magic.size() + 1 || data.substr(0, magic.size()) != magic ||
      data[magic.size()] != '\n')
    throw Error(ErrorCode::kValidation,
                "bad header, expected '" + std::string(magic) + "'");
  if (data.empty() || data.back() != '\n')
    throw Error(ErrorCode::kValidation, "truncated file");
  const auto last = data.rfind('\n', data.size() - 2);
  if (last == std::string_view::npos)
    throw Error(ErrorCode::kValidation, "missing checksum");
  const std::string_view trailer = data.substr(last + 1, data.size() - last - 2);
  if (trailer.substr(0, 9) != "checksum ")
    throw Error(ErrorCode::kValidation, "missing checksum");
  if (crc_hex(data.substr(0, last + 1)) != trailer.substr(9))
    throw Error(ErrorCode::kValidation, "checksum mismatch");
  std::vector<std::string> lines;
  std::size_t pos = magic.size() + 1;
  while (pos <= last) {
    const auto nl = data.find('\n', pos);
    lines.emplace_back(data.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace prockit::persist
