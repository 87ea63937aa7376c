#include "mvact/common.hpp"

#include <cstdio>
#include <filesystem>

namespace mvact {

std::string read_text_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) fail(ErrorKind::io, "cannot open for reading: " + path);
  std::string out;
  char buf[1 << 16];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) out.append(buf, n);
  std::fclose(f);
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  write_binary_file(path, content.data(), content.size());
}

std::vector<unsigned char> read_binary_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) fail(ErrorKind::io, "cannot open for reading: " + path);
  std::vector<unsigned char> out;
  unsigned char buf[1 << 16];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0)
    out.insert(out.end(), buf, buf + n);
  std::fclose(f);
  return out;
}

void write_binary_file(const std::string& path, const void* data,
                       std::size_t len) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) fail(ErrorKind::io, "cannot open for writing: " + path);
  if (len > 0 && std::fwrite(data, 1, len, f) != len) {
    std::fclose(f);
    fail(ErrorKind::io, "short write: " + path);
  }
  std::fclose(f);
}

std::uint64_t hash_file(const std::string& path) {
  auto bytes = read_binary_file(path);
  return fnv1a64(bytes.data(), bytes.size());
}

}  // namespace mvact
