#include "hose/tensor_io.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace hose {

void write_tensor(std::ostream& os, const DenseTensor& t) {
  os << t.order() << '\n';
  for (int k = 0; k < t.order(); ++k) {
    os << (k ? " " : "") << t.dim(k);
  }
  os << '\n';
  os << std::setprecision(17);
  for (Index i = 0; i < t.size(); ++i) {
    os << t[i] << '\n';
  }
}

void write_tensor_file(const std::string& path, const DenseTensor& t) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::IoError, "cannot open for writing: " + path);
  write_tensor(os, t);
  os.flush();
  if (!os) throw Error(ErrorCode::IoError, "write failed: " + path);
}

DenseTensor read_tensor(std::istream& is) {
  int order = 0;
  if (!(is >> order) || order < 1 || order > 64) {
    throw Error(ErrorCode::IoError, "bad tensor header: order");
  }
  std::vector<int> dims(static_cast<size_t>(order));
  for (int& d : dims) {
    if (!(is >> d) || d < 1) {
      throw Error(ErrorCode::IoError, "bad tensor header: dimensions");
    }
  }
  DenseTensor t(dims);
  for (Index i = 0; i < t.size(); ++i) {
    if (!(is >> t[i])) {
      throw Error(ErrorCode::IoError, "tensor file truncated");
    }
  }
  return t;
}

DenseTensor read_tensor_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IoError, "cannot open for reading: " + path);
  return read_tensor(is);
}

}  // namespace hose
