#pragma once

#include "mro/types.hpp"

#include <iosfwd>
#include <string>

namespace mro {

/// CSV with one sample per row; a non-numeric first row is treated as a header.
Dataset load_dataset_csv(const std::string& path);
void save_dataset_csv(const Dataset& data, const std::string& path);

/// JSON container {"m": int, "samples": [[...], ...]}.
Dataset load_dataset_json(const std::string& path);
void save_dataset_json(const Dataset& data, const std::string& path);

/// Dispatches on the .csv / .json extension.
Dataset load_dataset(const std::string& path);

}  // namespace mro
