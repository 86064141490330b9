#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "duat/tape.hpp"

namespace duat {

/// Parameter file: magic "DUAP", u32 version, u32 parameter count, then per
/// parameter u32 name length, name bytes, u32 rank, rank x u32 dims, and the
/// values as f32; trailing CRC32.
std::vector<std::uint8_t> encode_parameters(const ParameterStore& store);

struct NamedTensor {
  std::string name;
  Tensor value;
};
std::vector<NamedTensor> decode_parameters(std::span<const std::uint8_t> bytes);

/// Copies decoded values into `store`, which must hold exactly the same
/// names and shapes.
void assign_parameters(ParameterStore& store, const std::vector<NamedTensor>& values);

}  // namespace duat
