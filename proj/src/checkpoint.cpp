#include "duat/checkpoint.hpp"

#include <cstring>

#include "duat/binary_io.hpp"

namespace duat {

namespace {
constexpr char kParamMagic[4] = {'D', 'U', 'A', 'P'};
constexpr std::uint32_t kParamVersion = 1;
}  // namespace

std::vector<std::uint8_t> encode_parameters(const ParameterStore& store) {
  ByteWriter w;
  for (char c : kParamMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kParamVersion);
  w.u32(static_cast<std::uint32_t>(store.size()));
  for (std::size_t i = 0; i < store.size(); ++i) {
    const Parameter& p = store[i];
    w.str(p.name());
    w.u32(static_cast<std::uint32_t>(p.value.rank()));
    for (auto d : p.value.shape) w.u32(static_cast<std::uint32_t>(d));
    for (double v : p.value.data) w.f32(static_cast<float>(v));
  }
  w.seal();
  return w.data();
}

std::vector<NamedTensor> decode_parameters(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kParamMagic, 4) != 0) {
    throw FormatError("malformed header: not a parameter file");
  }
  auto body = verify_crc_trailer(bytes);
  ByteReader r(body);
  r.bytes(4);
  if (r.u32() != kParamVersion) throw FormatError("malformed header: unsupported parameter file version");
  const std::uint32_t count = r.u32();
  std::vector<NamedTensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor nt;
    nt.name = r.str(4096);
    const std::uint32_t rank = r.u32();
    if (rank > 8) throw FormatError("malformed payload: parameter rank " + std::to_string(rank));
    Shape shape;
    std::uint64_t n = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      shape.push_back(r.u32());
      n *= shape.back();
    }
    if (n * 4 > r.remaining()) throw FormatError("truncated payload: parameter " + nt.name);
    std::vector<double> values(n);
    for (auto& v : values) v = r.f32();
    nt.value = Tensor(std::move(shape), std::move(values));
    out.push_back(std::move(nt));
  }
  if (r.remaining() != 0) throw FormatError("malformed payload: trailing bytes");
  return out;
}

void assign_parameters(ParameterStore& store, const std::vector<NamedTensor>& values) {
  if (values.size() != store.size()) {
    throw FormatError("checkpoint holds " + std::to_string(values.size()) + " parameters, model expects " +
                      std::to_string(store.size()));
  }
  for (const auto& nt : values) {
    if (!store.contains(nt.name)) throw FormatError("checkpoint parameter not in model: " + nt.name);
    Parameter& p = store.get(nt.name);
    if (p.value.shape != nt.value.shape) {
      throw FormatError("shape mismatch for " + nt.name + ": " + shape_string(nt.value.shape) + " vs " +
                        shape_string(p.value.shape));
    }
    p.value.data = nt.value.data;
  }
}

}  // namespace duat
