#pragma once
// Shared plumbing: error types, content hashing, small file/string helpers.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mr {

static_assert(std::endian::native == std::endian::little,
              "on-disk formats assume a little-endian host");

// Error taxonomy. The CLI maps these to distinct exit codes; library code and
// tests rely on the types, not the messages.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};
struct DataError : std::runtime_error {
  explicit DataError(const std::string& m) : std::runtime_error(m) {}
};
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& m) : std::runtime_error(m) {}
};
struct DimError : std::runtime_error {
  explicit DimError(const std::string& m) : std::runtime_error(m) {}
};
struct IoError : std::runtime_error {
  explicit IoError(const std::string& m) : std::runtime_error(m) {}
};

// FNV-1a 64-bit. Used for content hashes in manifests and checkpoints; we need
// a stable, dependency-free hash, not a cryptographic one.
inline uint64_t fnv1a64(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}
inline uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

inline std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

// Derive a child seed from a master seed and a stream tag, so independent
// consumers (init, shuffling per epoch, corruption, ...) never share a stream.
inline uint64_t derive_seed(uint64_t master, uint64_t tag) {
  uint64_t h = fnv1a64(&master, sizeof(master));
  h = fnv1a64(&tag, sizeof(tag), h);
  return h ? h : 0x9e3779b97f4a7c15ull;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw IoError("cannot open for read: " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// All artifact writes go through a temp file + rename so a crash never leaves
// a truncated file behind.
inline void write_file_atomic(const std::filesystem::path& p, const std::string& content) {
  namespace fs = std::filesystem;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for write: " + tmp.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw IoError("short write: " + tmp.string());
  }
  fs::rename(tmp, p);
}

inline uint64_t hash_file(const std::filesystem::path& p) {
  return fnv1a64(read_file(p));
}

// Minimal CSV writer; fields are assumed not to contain commas or newlines
// (all our outputs are numeric or simple identifiers).
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {
    std::ostringstream ss;
    for (size_t i = 0; i < header_.size(); ++i) ss << (i ? "," : "") << header_[i];
    ss << "\n";
    body_ = ss.str();
  }
  void row(const std::vector<std::string>& fields) {
    if (fields.size() != header_.size()) throw DimError("csv row width mismatch");
    std::ostringstream ss;
    for (size_t i = 0; i < fields.size(); ++i) ss << (i ? "," : "") << fields[i];
    ss << "\n";
    body_ += ss.str();
  }
  const std::string& str() const { return body_; }
  void save(const std::filesystem::path& p) const { write_file_atomic(p, body_); }

 private:
  std::vector<std::string> header_;
  std::string body_;
};

inline std::string fmt_double(double v, int prec = 12) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
  return std::string(buf);
}

}  // namespace mr
