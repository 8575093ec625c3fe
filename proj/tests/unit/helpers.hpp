#pragma once

#include "fairalloc/instance.hpp"

#include <initializer_list>
#include <vector>

namespace fairalloc::test {

inline Matrix rows(std::initializer_list<std::initializer_list<double>> values) {
  const std::size_t cols = values.begin()->size();
  Matrix m(values.size(), cols);
  std::size_t t = 0;
  for (const auto& row : values) {
    std::size_t i = 0;
    for (double v : row) m(t, i++) = v;
    ++t;
  }
  return m;
}

inline Instance make(std::initializer_list<std::initializer_list<double>> values) {
  return build_instance(rows(values));
}

inline Instance make(std::initializer_list<std::initializer_list<double>> values,
                     std::vector<double> weights) {
  return build_instance(rows(values), std::move(weights));
}

}  // namespace fairalloc::test
