#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace snap {

// Minimal reader/writer for the safetensors checkpoint format: an 8-byte
// little-endian header length, a JSON header mapping tensor names to dtype,
// shape and byte offsets, then the raw tensor buffer.
struct TensorInfo {
    std::string dtype; // "F32" or "F64"
    std::vector<std::int64_t> shape;
    std::size_t offset = 0; // into the data section
    std::size_t nbytes = 0;

    std::size_t n_elements() const;
};

class SafetensorsFile {
public:
    static SafetensorsFile read(const std::filesystem::path& path);

    bool contains(const std::string& name) const;
    const TensorInfo& info(const std::string& name) const;
    std::vector<std::string> names() const;
    // converts F32/F64 payloads to double
    std::vector<double> tensor_as_double(const std::string& name) const;

private:
    std::string data_;
    std::map<std::string, TensorInfo> tensors_;
};

struct TensorToWrite {
    std::vector<std::int64_t> shape;
    std::vector<float> values;
};

void write_safetensors(const std::filesystem::path& path,
                       const std::map<std::string, TensorToWrite>& tensors);

} // namespace snap
