#include "snap/safetensors.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "snap/errors.hpp"

namespace snap {

std::size_t TensorInfo::n_elements() const {
    std::size_t n = 1;
    for (auto d : shape) n *= static_cast<std::size_t>(d);
    return n;
}

SafetensorsFile SafetensorsFile::read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint file: " + path.string());

    std::uint64_t header_len = 0;
    in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
    if (!in) throw DataError("checkpoint is truncated: " + path.string());
    const auto file_size = std::filesystem::file_size(path);
    if (header_len > file_size - sizeof(header_len))
        throw DataError("checkpoint header length exceeds the file: " + path.string());

    std::string header(header_len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(header_len));
    if (!in) throw DataError("checkpoint header is truncated: " + path.string());

    SafetensorsFile file;
    {
        std::ostringstream rest;
        rest << in.rdbuf();
        file.data_ = rest.str();
    }

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(header);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed checkpoint header: ") + e.what());
    }
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (it.key() == "__metadata__") continue;
        TensorInfo info;
        try {
            info.dtype = it.value().at("dtype").get<std::string>();
            info.shape = it.value().at("shape").get<std::vector<std::int64_t>>();
            auto offsets = it.value().at("data_offsets").get<std::vector<std::uint64_t>>();
            if (offsets.size() != 2 || offsets[1] < offsets[0])
                throw DataError("bad data offsets for tensor " + it.key());
            info.offset = offsets[0];
            info.nbytes = offsets[1] - offsets[0];
        } catch (const nlohmann::json::exception& e) {
            throw DataError("malformed tensor entry " + it.key() + ": " + e.what());
        }
        if (info.offset + info.nbytes > file.data_.size())
            throw DataError("tensor data out of range: " + it.key());
        file.tensors_[it.key()] = std::move(info);
    }
    return file;
}

bool SafetensorsFile::contains(const std::string& name) const { return tensors_.count(name) > 0; }

const TensorInfo& SafetensorsFile::info(const std::string& name) const {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw DataError("checkpoint has no tensor named " + name);
    return it->second;
}

std::vector<std::string> SafetensorsFile::names() const {
    std::vector<std::string> out;
    out.reserve(tensors_.size());
    for (const auto& [name, info] : tensors_) out.push_back(name);
    return out;
}

std::vector<double> SafetensorsFile::tensor_as_double(const std::string& name) const {
    const TensorInfo& t = info(name);
    const char* base = data_.data() + t.offset;
    std::vector<double> out(t.n_elements());
    if (t.dtype == "F32") {
        if (t.nbytes != out.size() * 4) throw DataError("tensor size mismatch: " + name);
        for (std::size_t i = 0; i < out.size(); ++i) {
            float v;
            std::memcpy(&v, base + i * 4, 4);
            out[i] = static_cast<double>(v);
        }
    } else if (t.dtype == "F64") {
        if (t.nbytes != out.size() * 8) throw DataError("tensor size mismatch: " + name);
        std::memcpy(out.data(), base, t.nbytes);
    } else {
        throw DataError("unsupported tensor dtype " + t.dtype + " for " + name);
    }
    return out;
}

void write_safetensors(const std::filesystem::path& path,
                       const std::map<std::string, TensorToWrite>& tensors) {
    nlohmann::json header = nlohmann::json::object();
    std::size_t offset = 0;
    for (const auto& [name, tensor] : tensors) {
        std::size_t nbytes = tensor.values.size() * 4;
        header[name] = {{"dtype", "F32"},
                        {"shape", tensor.shape},
                        {"data_offsets", {offset, offset + nbytes}}};
        offset += nbytes;
    }
    std::string header_text = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint file: " + path.string());
    std::uint64_t header_len = header_text.size();
    out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    for (const auto& [name, tensor] : tensors)
        out.write(reinterpret_cast<const char*>(tensor.values.data()),
                  static_cast<std::streamsize>(tensor.values.size() * 4));
    if (!out) throw DataError("failed writing checkpoint file: " + path.string());
}

} // namespace snap
