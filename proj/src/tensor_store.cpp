#include "rankrl/tensor_store.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace rankrl {

namespace {

constexpr char kMagic[4] = {'R', 'K', 'T', 'N'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

std::string read_bytes(std::istream& in, std::uint64_t n) {
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    return s;
}

[[noreturn]] void fail(const std::string& path, const std::string& why) {
    throw std::runtime_error("tensor file " + path + ": " + why);
}

}  // namespace

void save_tensors(const std::string& path, const nlohmann::json& meta,
                  const std::vector<ConstTensorRef>& tensors) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");

    out.write(kMagic, sizeof(kMagic));
    write_u32(out, kVersion);

    const std::string meta_text = meta.dump();
    write_u64(out, meta_text.size());
    out.write(meta_text.data(), static_cast<std::streamsize>(meta_text.size()));

    write_u64(out, tensors.size());
    for (const auto& t : tensors) {
        write_u64(out, t.name.size());
        out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
        const Matrix& m = *t.value;
        write_u64(out, static_cast<std::uint64_t>(m.rows()));
        write_u64(out, static_cast<std::uint64_t>(m.cols()));
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                const double v = m(r, c);
                out.write(reinterpret_cast<const char*>(&v), sizeof(v));
            }
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

TensorFile load_tensors(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);

    char magic[4] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        fail(path, "bad magic, not a tensor file");
    const std::uint32_t version = read_u32(in);
    if (version != kVersion)
        fail(path, "unsupported version " + std::to_string(version));

    TensorFile file;
    const std::uint64_t meta_len = read_u64(in);
    const std::string meta_text = read_bytes(in, meta_len);
    if (!in) fail(path, "truncated metadata");
    file.meta = nlohmann::json::parse(meta_text);

    const std::uint64_t count = read_u64(in);
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint64_t name_len = read_u64(in);
        const std::string name = read_bytes(in, name_len);
        const std::uint64_t rows = read_u64(in);
        const std::uint64_t cols = read_u64(in);
        if (!in) fail(path, "truncated tensor header");
        Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                double v = 0.0;
                in.read(reinterpret_cast<char*>(&v), sizeof(v));
                m(r, c) = v;
            }
        if (!in) fail(path, "truncated tensor data for " + name);
        if (!file.tensors.emplace(name, std::move(m)).second)
            fail(path, "duplicate tensor " + name);
    }
    return file;
}

void load_tensors_into(const std::string& path, const std::vector<TensorRef>& into,
                       nlohmann::json* meta_out) {
    TensorFile file = load_tensors(path);
    for (const auto& ref : into) {
        auto it = file.tensors.find(ref.name);
        if (it == file.tensors.end()) fail(path, "missing tensor " + ref.name);
        const Matrix& stored = it->second;
        if (stored.rows() != ref.value->rows() || stored.cols() != ref.value->cols())
            fail(path, "shape mismatch for " + ref.name + ": stored " +
                           std::to_string(stored.rows()) + "x" + std::to_string(stored.cols()) +
                           ", expected " + std::to_string(ref.value->rows()) + "x" +
                           std::to_string(ref.value->cols()));
        *ref.value = stored;
    }
    if (meta_out) *meta_out = std::move(file.meta);
}

}  // namespace rankrl
