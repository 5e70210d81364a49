#include "rssa/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace rssa {

namespace {

constexpr char kMagic[8] = {'R', 'S', 'S', 'A', 'A', 'R', 'C', 'H'};

template <class T>
void write_pod(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw CheckpointError("archive truncated");
    return v;
}

}  // namespace

void Archive::put(const std::string& name, Tensor t) {
    for (auto& [n, existing] : arrays_) {
        if (n == name) {
            existing = std::move(t);
            return;
        }
    }
    arrays_.emplace_back(name, std::move(t));
}

const Tensor& Archive::get(const std::string& name) const {
    for (const auto& [n, t] : arrays_)
        if (n == name) return t;
    throw CheckpointError("archive missing array: " + name);
}

bool Archive::has(const std::string& name) const {
    for (const auto& [n, t] : arrays_)
        if (n == name) return true;
    return false;
}

void Archive::save(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw CheckpointError("cannot open for write: " + path.string());
    os.write(kMagic, sizeof(kMagic));
    nlohmann::ordered_json meta_out = meta;
    if (!meta_out.contains("schema_version")) meta_out["schema_version"] = kArchiveSchemaVersion;
    const std::string js = meta_out.dump();
    write_pod<std::uint64_t>(os, js.size());
    os.write(js.data(), static_cast<std::streamsize>(js.size()));
    write_pod<std::uint64_t>(os, arrays_.size());
    for (const auto& [name, t] : arrays_) {
        write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(t.rank()));
        for (int i = 0; i < t.rank(); ++i) write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(t.size(i)));
        os.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(sizeof(double) * t.numel()));
    }
    if (!os) throw CheckpointError("write failed: " + path.string());
}

Archive Archive::load(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw CheckpointError("cannot open archive: " + path.string());
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw CheckpointError("not an rssa archive: " + path.string());
    Archive a;
    const auto jlen = read_pod<std::uint64_t>(is);
    std::string js(jlen, '\0');
    is.read(js.data(), static_cast<std::streamsize>(jlen));
    if (!is) throw CheckpointError("archive truncated");
    a.meta = nlohmann::ordered_json::parse(js, nullptr, false);
    if (a.meta.is_discarded()) throw CheckpointError("archive metadata is not valid JSON");
    if (!a.meta.contains("schema_version") || !a.meta["schema_version"].is_number_integer())
        throw CheckpointError("archive metadata missing schema_version");
    const int version = a.meta["schema_version"].get<int>();
    if (version != kArchiveSchemaVersion)
        throw CheckpointError("unsupported archive schema_version " + std::to_string(version));
    const auto count = read_pod<std::uint64_t>(is);
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto nlen = read_pod<std::uint32_t>(is);
        std::string name(nlen, '\0');
        is.read(name.data(), nlen);
        const auto rank = read_pod<std::uint32_t>(is);
        if (rank > 4) throw CheckpointError("archive array rank > 4");
        std::vector<int> shape;
        std::int64_t numel = 1;
        for (std::uint32_t r = 0; r < rank; ++r) {
            const auto d = read_pod<std::uint64_t>(is);
            shape.push_back(static_cast<int>(d));
            numel *= static_cast<std::int64_t>(d);
        }
        std::vector<double> data(static_cast<std::size_t>(numel));
        is.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(sizeof(double) * numel));
        if (!is) throw CheckpointError("archive truncated in array " + name);
        a.arrays_.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
    }
    return a;
}

void Archive::put_params(const std::string& prefix, const nn::ParamList& params) {
    for (const auto& [name, p] : params) put(prefix + name, p->value);
}

void Archive::load_params(const std::string& prefix, const nn::ParamList& params) const {
    for (const auto& [name, p] : params) {
        const Tensor& t = get(prefix + name);
        if (!(t.shape() == p->value.shape()))
            throw CheckpointError("parameter shape mismatch for " + prefix + name + ": archive " + t.shape_str() +
                                  " vs model " + p->value.shape_str());
        p->value = t;
    }
}

void Archive::put_adam(const std::string& prefix, const nn::Adam& adam) {
    for (const auto& [name, slot] : adam.state()) {
        put(prefix + name + ".m", slot.m);
        put(prefix + name + ".v", slot.v);
        put(prefix + name + ".t", Tensor({1}, {static_cast<double>(slot.t)}));
    }
}

void Archive::load_adam(const std::string& prefix, nn::Adam& adam) const {
    adam.state().clear();
    for (const auto& [name, t] : arrays_) {
        if (name.rfind(prefix, 0) != 0) continue;
        const std::string rest = name.substr(prefix.size());
        if (rest.size() > 2 && rest.compare(rest.size() - 2, 2, ".m") == 0) {
            const std::string key = rest.substr(0, rest.size() - 2);
            nn::Adam::Slot slot;
            slot.m = get(prefix + key + ".m");
            slot.v = get(prefix + key + ".v");
            slot.t = static_cast<std::int64_t>(get(prefix + key + ".t").item());
            adam.state()[key] = std::move(slot);
        }
    }
}

}  // namespace rssa
