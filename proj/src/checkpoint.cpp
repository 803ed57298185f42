#include "replay/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "replay/errors.hpp"

namespace replay {

namespace {

constexpr char kMagic[8] = {'R', 'P', 'L', 'Y', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::istream& in, T& v, const std::string& path) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw DataError("truncated checkpoint: " + path);
}

void write_doubles(std::ostream& out, const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_doubles(std::istream& in, std::vector<double>& v,
                  const std::string& path) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!in) throw DataError("truncated checkpoint: " + path);
}

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::string s;
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParameterStore& params,
                     const CheckpointHeader& header) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, kVersion);
    write_pod(out, header.seed);
    write_pod(out, header.epochs_completed);
    write_pod(out, header.adam_steps);

    const auto tensors = params.tensors();
    write_pod(out, static_cast<std::uint64_t>(tensors.size()));
    for (const ParamTensor* t : tensors) {
        write_pod(out, static_cast<std::uint32_t>(t->name.size()));
        out.write(t->name.data(),
                  static_cast<std::streamsize>(t->name.size()));
        write_pod(out, static_cast<std::uint32_t>(t->shape.size()));
        for (std::size_t d : t->shape) {
            write_pod(out, static_cast<std::uint64_t>(d));
        }
        write_doubles(out, t->value);
        write_doubles(out, t->m);
        write_doubles(out, t->v);
    }
    if (!out) throw DataError("failed writing checkpoint: " + path);
}

namespace {

CheckpointHeader read_header(std::istream& in, const std::string& path) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw DataError("not a checkpoint file: " + path);
    }
    CheckpointHeader h;
    read_pod(in, h.version, path);
    if (h.version != kVersion) {
        throw DataError("unsupported checkpoint version " +
                        std::to_string(h.version) + " in " + path);
    }
    read_pod(in, h.seed, path);
    read_pod(in, h.epochs_completed, path);
    read_pod(in, h.adam_steps, path);
    return h;
}

}  // namespace

CheckpointHeader peek_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    return read_header(in, path);
}

CheckpointHeader load_checkpoint(const std::string& path,
                                 ParameterStore& params) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    const CheckpointHeader header = read_header(in, path);

    std::uint64_t count = 0;
    read_pod(in, count, path);
    if (count != params.tensors().size()) {
        throw ConfigError("checkpoint " + path + " has " +
                          std::to_string(count) + " tensors, configuration expects " +
                          std::to_string(params.tensors().size()));
    }
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint32_t name_len = 0;
        read_pod(in, name_len, path);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        if (!in) throw DataError("truncated checkpoint: " + path);

        std::uint32_t ndim = 0;
        read_pod(in, ndim, path);
        std::vector<std::size_t> shape(ndim);
        for (std::uint32_t d = 0; d < ndim; ++d) {
            std::uint64_t dim = 0;
            read_pod(in, dim, path);
            shape[d] = static_cast<std::size_t>(dim);
        }
        ParamTensor* t = params.find(name);
        if (!t) {
            throw ConfigError("checkpoint tensor " + name +
                              " is not part of this configuration");
        }
        if (t->shape != shape) {
            throw ConfigError("checkpoint tensor " + name + " has shape " +
                              shape_string(shape) + ", expected " +
                              shape_string(t->shape));
        }
        read_doubles(in, t->value, path);
        read_doubles(in, t->m, path);
        read_doubles(in, t->v, path);
        t->zero_grad();
    }
    return header;
}

}  // namespace replay
