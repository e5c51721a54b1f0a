#pragma once

#include <string>

#include "rfnet/io/dataset_io.hpp"
#include "rfnet/meta/trainer.hpp"

namespace rfnet::io {

// Model checkpoints reuse the dataset envelope style, magic "RFCK":
//   magic[4] version:u16
//   meta_count:u32, then key/value strings (u16 length + bytes each)
//   tensor_count:u32, then per tensor:
//     name:str partition:u8 ndims:u8 dims:u32[ndims] values:f32[...]
// The network configuration and normalization stats ride in the meta block.
void save_checkpoint(const meta::Model<float>& model, const std::string& path);
meta::Model<float> load_checkpoint(const std::string& path);

}  // namespace rfnet::io
