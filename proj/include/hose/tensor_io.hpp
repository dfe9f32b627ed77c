#pragma once

#include <iosfwd>
#include <string>

#include "hose/tensor.hpp"

namespace hose {

/// Text tensor format (".ten"):
///   line 1: K
///   line 2: K whitespace-separated dimensions
///   then p whitespace-separated values, first index fastest.
/// Values are written with 17 significant digits so a write/read round trip
/// is bit exact.
void write_tensor(std::ostream& os, const DenseTensor& t);
void write_tensor_file(const std::string& path, const DenseTensor& t);

DenseTensor read_tensor(std::istream& is);
DenseTensor read_tensor_file(const std::string& path);

}  // namespace hose
