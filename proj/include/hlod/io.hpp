#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hlod/corrector.hpp"
#include "hlod/fem.hpp"
#include "hlod/problems.hpp"

namespace hlod {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Structured-grid field dump: "nx ny" header (nodes per axis), then one
/// "re im" line per node in row-major order (x fastest). Values are written
/// with 17 significant digits, so read_field(write_field(v)) == v exactly.
void write_field(const std::filesystem::path& path, const CVector& nodal,
                 int nodes_per_axis);
CVector read_field(const std::filesystem::path& path, int* nodes_per_axis = nullptr);

/// Raster pattern files: "nx ny" header then nx*ny row-major values.
void write_raster(const std::filesystem::path& path, const Raster& r);
Raster read_raster(const std::filesystem::path& path);

/// Minimal lossless CSV: first row is the header; doubles formatted with 17
/// significant digits.
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);
std::vector<std::vector<std::string>> read_csv(
    const std::filesystem::path& path);

std::string format_double(double v);

/// FNV-1a over a byte string; used for cache keys.
uint64_t fnv1a64(const void* data, size_t len);
uint64_t fnv1a64(const std::string& s);

/// On-disk corrector cache keyed by (element, layers, hash of the
/// patch-restricted Kerr weight). One versioned binary blob per key holding
/// the four correction vectors and the weight snapshot.
class CorrectorCache {
 public:
  explicit CorrectorCache(std::filesystem::path dir);

  /// Loads the corrector for (element, layers) if a blob for the current
  /// patch weights exists.
  bool load(const MeshHierarchy& hier, int element, int layers,
            const CoefficientField& kerr_weight, ElementCorrector& out) const;
  void store(const MeshHierarchy& hier, const ElementCorrector& c) const;

  static uint64_t weight_key(const MeshHierarchy& hier, int element,
                             int layers, const CoefficientField& kerr_weight);

 private:
  std::filesystem::path path_for(int element, int layers, uint64_t key) const;
  std::filesystem::path dir_;
};

}  // namespace hlod
