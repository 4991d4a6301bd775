#pragma once

#include <string>
#include <string_view>

namespace qttn {

enum class BackendKind { reference, optimized };

/// Selects the kernel set used for contractions and permutations.
/// `thread_count` is a hint forwarded to the OpenMP kernels and to Eigen.
struct BackendId {
  BackendKind name = BackendKind::optimized;
  int thread_count = 1;

  friend bool operator==(const BackendId&, const BackendId&) = default;
};

std::string_view to_string(BackendKind kind);
BackendKind backend_from_string(std::string_view name);

}  // namespace qttn
