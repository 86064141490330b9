#include <cstring>

#include "duat/binary_io.hpp"
#include "duat/graph.hpp"

namespace duat {

namespace {
constexpr char kGraphMagic[4] = {'D', 'U', 'A', 'G'};
constexpr std::uint32_t kGraphVersion = 1;
}  // namespace

std::vector<std::uint8_t> encode_graph(const TextGraph& graph) {
  ByteWriter w;
  for (char c : kGraphMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kGraphVersion);
  w.u32(static_cast<std::uint32_t>(graph.num_docs()));
  w.u32(static_cast<std::uint32_t>(graph.num_words()));
  for (NodeId node = 0; node < graph.num_nodes(); ++node) {
    auto list = graph.neighbors(node);
    w.u32(static_cast<std::uint32_t>(list.size()));
    for (const auto& nb : list) {
      w.u32(nb.id);
      w.f32(static_cast<float>(nb.weight));
    }
  }
  w.seal();
  return w.data();
}

TextGraph decode_graph(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kGraphMagic, 4) != 0) {
    throw FormatError("malformed header: not a graph file");
  }
  if (bytes.size() < 20) throw FormatError("truncated payload: missing checksum");
  ByteReader r(bytes.first(bytes.size() - 4));
  r.bytes(4);
  const std::uint32_t version = r.u32();
  if (version != kGraphVersion) {
    throw FormatError("malformed header: unsupported graph version " + std::to_string(version));
  }
  const std::size_t n_docs = r.u32();
  const std::size_t n_words = r.u32();
  const std::size_t n = n_docs + n_words;
  // Each node needs at least its 4-byte count.
  if (r.remaining() < n * 4) throw FormatError("truncated payload: node table");

  std::vector<std::size_t> offsets{0};
  offsets.reserve(n + 1);
  std::vector<Neighbor> flat;
  for (std::size_t node = 0; node < n; ++node) {
    const std::uint32_t count = r.u32();
    if (static_cast<std::uint64_t>(count) * 8 > r.remaining()) {
      throw FormatError("truncated payload: neighbor list of node " + std::to_string(node));
    }
    for (std::uint32_t e = 0; e < count; ++e) {
      const NodeId id = r.u32();
      const float weight = r.f32();
      if (id >= n) throw FormatError("malformed payload: neighbor id out of range");
      flat.push_back({id, static_cast<double>(weight)});
    }
    offsets.push_back(flat.size());
  }
  if (r.remaining() != 0) throw FormatError("malformed payload: trailing bytes");
  verify_crc_trailer(bytes);
  return TextGraph(n_docs, n_words, std::move(offsets), std::move(flat));
}

void save_graph(const TextGraph& graph, const std::string& path) {
  write_file_bytes(path, encode_graph(graph));
}

TextGraph load_graph(const std::string& path) { return decode_graph(read_file_bytes(path)); }

}  // namespace duat
