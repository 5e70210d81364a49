#pragma once

#include "rssa/nn.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace rssa {

inline constexpr int kArchiveSchemaVersion = 1;

// Single-file archive: JSON metadata block plus named double arrays keyed by
// dotted path names. Binary layout is fixed little-endian.
class Archive {
  public:
    nlohmann::ordered_json meta;

    void put(const std::string& name, Tensor t);
    const Tensor& get(const std::string& name) const;
    bool has(const std::string& name) const;
    const std::vector<std::pair<std::string, Tensor>>& arrays() const { return arrays_; }

    void save(const std::filesystem::path& path) const;
    static Archive load(const std::filesystem::path& path);

    // Store/restore a parameter list under a dotted prefix.
    void put_params(const std::string& prefix, const nn::ParamList& params);
    void load_params(const std::string& prefix, const nn::ParamList& params) const;

    void put_adam(const std::string& prefix, const nn::Adam& adam);
    void load_adam(const std::string& prefix, nn::Adam& adam) const;

  private:
    std::vector<std::pair<std::string, Tensor>> arrays_;
};

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace rssa
