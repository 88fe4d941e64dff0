#include "safecontact/policy_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace safecontact {

namespace {

constexpr char kMagic[8] = {'S', 'C', 'P', 'O', 'L', 'I', 'C', 'Y'};

class Writer {
 public:
  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    bytes.insert(bytes.end(), raw, raw + sizeof(T));
  }
  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t n) : data_(data), n_(n) {}
  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > n_) throw FormatError("checkpoint: unexpected end of header");
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, data_ + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, raw, sizeof(T));
    return v;
  }
  std::size_t remaining() const { return n_ - pos_; }

 private:
  const std::uint8_t* data_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void save_policy(const PolicyParams& params, const std::filesystem::path& path) {
  if (static_cast<std::size_t>(params.params.size()) != params.arch.param_count()) {
    throw std::invalid_argument("save_policy: parameter count does not match the architecture");
  }
  Writer w;
  for (char c : kMagic) w.put(static_cast<std::uint8_t>(c));
  w.put(kCheckpointVersion);
  w.put(static_cast<std::uint32_t>(params.arch.sizes.size()));
  for (int s : params.arch.sizes) w.put(static_cast<std::uint32_t>(s));
  w.put(static_cast<std::uint32_t>(params.arch.hidden));
  w.put(params.action_scale);
  w.put(static_cast<std::uint64_t>(params.params.size()));
  for (Eigen::Index i = 0; i < params.params.size(); ++i) w.put(params.params(i));
  w.put(fnv1a64(w.bytes));

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_policy: cannot open " + tmp.string());
    out.write(reinterpret_cast<const char*>(w.bytes.data()), static_cast<std::streamsize>(w.bytes.size()));
    if (!out) throw std::runtime_error("save_policy: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

PolicyParams load_policy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_policy: cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < sizeof(kMagic) + 8) throw ChecksumError("checkpoint " + path.string() + ": truncated file");
  const std::size_t body = bytes.size() - 8;
  Reader tail(bytes.data() + body, 8);
  const auto stored = tail.get<std::uint64_t>();
  if (stored != fnv1a64({bytes.data(), body})) {
    throw ChecksumError("checkpoint " + path.string() + ": checksum mismatch (truncated or corrupted)");
  }

  Reader r(bytes.data(), body);
  for (char c : kMagic) {
    if (r.get<std::uint8_t>() != static_cast<std::uint8_t>(c))
      throw FormatError("checkpoint " + path.string() + ": bad magic");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw VersionError("checkpoint " + path.string() + ": format version " + std::to_string(version) +
                       ", expected " + std::to_string(kCheckpointVersion));
  }
  PolicyParams p;
  const auto n_sizes = r.get<std::uint32_t>();
  if (n_sizes < 2 || n_sizes > 64) throw ArchitectureMismatchError("checkpoint: implausible layer count");
  for (std::uint32_t i = 0; i < n_sizes; ++i) p.arch.sizes.push_back(static_cast<int>(r.get<std::uint32_t>()));
  const auto act = r.get<std::uint32_t>();
  if (act > 1) throw ArchitectureMismatchError("checkpoint: unknown activation tag " + std::to_string(act));
  p.arch.hidden = static_cast<nn::Activation>(act);
  p.action_scale = r.get<double>();
  const auto count = r.get<std::uint64_t>();
  if (count != p.arch.param_count()) {
    throw ArchitectureMismatchError("checkpoint " + path.string() + ": header declares " + std::to_string(count) +
                                    " parameters but the architecture needs " +
                                    std::to_string(p.arch.param_count()));
  }
  if (r.remaining() != count * sizeof(float)) throw FormatError("checkpoint: parameter block size mismatch");
  p.params.resize(static_cast<Eigen::Index>(count));
  for (std::uint64_t i = 0; i < count; ++i) p.params(static_cast<Eigen::Index>(i)) = r.get<float>();
  return p;
}

PolicyParams load_policy(const std::filesystem::path& path, const nn::Architecture& expected) {
  PolicyParams p = load_policy(path);
  if (!(p.arch == expected)) {
    throw ArchitectureMismatchError("checkpoint " + path.string() + ": architecture differs from the expected one");
  }
  return p;
}

}  // namespace safecontact
