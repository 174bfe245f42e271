#include "farm/neural/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "farm/errors.hpp"

namespace farm::nn {

namespace {

constexpr std::array<char, 4> kMagic = {'F', 'D', 'C', 'K'};

template <typename T>
void put(std::string& buf, T v) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  buf.append(bytes, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& data) : data_(data) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > data_.size()) throw CheckpointError("checkpoint is truncated");
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string bytes(std::size_t n) {
    if (pos_ + n > data_.size()) throw CheckpointError("checkpoint is truncated");
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  const std::string& data_;
  std::size_t pos_ = 0;
};

std::uint64_t fnv1a_bytes(const char* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Validates magic, version and checksum; leaves the reader after the hash.
std::uint64_t read_header(Reader& r, const std::string& data) {
  if (data.size() < kMagic.size() + 4 + 8 + 4 + 8) throw CheckpointError("checkpoint is truncated");
  if (std::memcmp(data.data(), kMagic.data(), kMagic.size()) != 0)
    throw CheckpointError("not a checkpoint file (bad magic)");
  const std::size_t body = data.size() - 8;
  std::uint64_t stored = 0;
  std::memcpy(&stored, data.data() + body, 8);
  if (stored != fnv1a_bytes(data.data(), body)) throw CheckpointError("checkpoint checksum mismatch");
  r.bytes(kMagic.size());
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  return r.get<std::uint64_t>();
}

}  // namespace

std::uint64_t fnv1a(const std::string& text) { return fnv1a_bytes(text.data(), text.size()); }

void save_checkpoint(const std::filesystem::path& path, const ParamList& params,
                     std::uint64_t spec_hash) {
  std::string buf(kMagic.begin(), kMagic.end());
  put<std::uint32_t>(buf, kCheckpointVersion);
  put<std::uint64_t>(buf, spec_hash);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(params.size()));
  std::ostringstream manifest;
  manifest << "version " << kCheckpointVersion << "\nspec_hash " << std::hex << spec_hash
           << std::dec << "\nparams " << params.size() << "\n";
  for (const Param* p : params) {
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(p->name.size()));
    buf += p->name;
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(p->value.rows()));
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(p->value.cols()));
    for (Eigen::Index i = 0; i < p->value.rows(); ++i)
      for (Eigen::Index j = 0; j < p->value.cols(); ++j) put<double>(buf, p->value(i, j));
    manifest << p->name << ' ' << p->value.rows() << 'x' << p->value.cols() << "\n";
  }
  put<std::uint64_t>(buf, fnv1a_bytes(buf.data(), buf.size()));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  std::ofstream man(path.string() + ".manifest");
  if (!man) throw CheckpointError("cannot write manifest for " + path.string());
  man << manifest.str();
}

void load_checkpoint(const std::filesystem::path& path, const ParamList& params,
                     std::uint64_t spec_hash) {
  const std::string data = read_file(path);
  Reader r(data);
  const std::uint64_t hash = read_header(r, data);
  if (hash != spec_hash) throw CheckpointError("checkpoint was written for a different configuration");
  const auto count = r.get<std::uint32_t>();
  if (count != params.size())
    throw CheckpointError("checkpoint holds " + std::to_string(count) + " parameters, expected " +
                          std::to_string(params.size()));
  std::vector<Matrix> values;
  for (const Param* p : params) {
    const auto len = r.get<std::uint32_t>();
    const std::string name = r.bytes(len);
    const auto rows = r.get<std::uint32_t>();
    const auto cols = r.get<std::uint32_t>();
    if (name != p->name || rows != p->value.rows() || cols != p->value.cols())
      throw CheckpointError("checkpoint parameter " + name + " does not match " + p->name);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.get<double>();
    values.push_back(std::move(m));
  }
  if (r.pos() != data.size() - 8) throw CheckpointError("trailing bytes in checkpoint");
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = std::move(values[i]);
}

std::uint64_t read_checkpoint_hash(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  Reader r(data);
  return read_header(r, data);
}

}  // namespace farm::nn
