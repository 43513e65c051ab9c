#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "rankrl/linalg.hpp"

namespace rankrl {

// Binary container for named f64 tensors plus a free-form JSON metadata
// block. Layout (all integers little-endian):
//   magic "RKTN", u32 version,
//   u64 metadata length, metadata bytes (UTF-8 JSON),
//   u64 tensor count, then per tensor:
//     u64 name length, name bytes, u64 rows, u64 cols, rows*cols f64
//     in row-major order.
struct TensorFile {
    nlohmann::json meta;
    std::map<std::string, Matrix> tensors;
};

void save_tensors(const std::string& path, const nlohmann::json& meta,
                  const std::vector<ConstTensorRef>& tensors);

TensorFile load_tensors(const std::string& path);

// Copies stored values into existing tensors, matching by name. Throws if a
// requested name is absent or its stored shape differs.
void load_tensors_into(const std::string& path, const std::vector<TensorRef>& into,
                       nlohmann::json* meta_out = nullptr);

}  // namespace rankrl
