#pragma once

#include <cstdint>
#include <cstring>
#include <random>
#include <vector>

#include "dcpcc/autodiff.hpp"

namespace testing {

inline dcpcc::Tensor random_tensor(dcpcc::Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  dcpcc::Tensor t(shape);
  for (double& v : t.values()) v = u(rng);
  return t;
}

inline std::vector<std::uint8_t> random_labels(std::size_t n, std::mt19937_64& rng, bool both_classes = true) {
  std::bernoulli_distribution coin(0.5);
  std::vector<std::uint8_t> labels(n);
  for (auto& l : labels) l = coin(rng) ? 1 : 0;
  if (both_classes && n >= 2) {
    labels[0] = 1;
    labels[1] = 0;
  }
  return labels;
}

// FNV-1a over the raw bytes of the tensors' values.
inline std::uint64_t hash_values(const std::vector<const dcpcc::Tensor*>& tensors) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto* t : tensors) {
    for (double v : t->values()) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof(double));
      for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
      }
    }
  }
  return h;
}

}  // namespace testing
