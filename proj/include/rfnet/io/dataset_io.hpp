#pragma once

#include <stdexcept>
#include <string>

#include "rfnet/sim/dataset.hpp"

namespace rfnet::io {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class BadMagicError : public FormatError {
public:
    using FormatError::FormatError;
};
class TruncatedFileError : public FormatError {
public:
    using FormatError::FormatError;
};
class ShapeMismatchError : public FormatError {
public:
    using FormatError::FormatError;
};

// Dataset container format, magic "RFDS", little-endian:
//   magic[4] version:u16 variant:u8 K:u32 L:u32 Nr:u32
//   env_count:u32 class_count:u32 record_count:u32
//   records: env_id:u32 class_id:u16 values:f32[K*L*Nr]
void write_dataset(const sim::Dataset& ds, const std::string& path);
sim::Dataset read_dataset(const std::string& path);

}  // namespace rfnet::io
