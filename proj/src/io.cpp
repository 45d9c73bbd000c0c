#include "hlod/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hlod {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_field(const std::filesystem::path& path, const CVector& nodal,
                 int nodes_per_axis) {
  if (nodal.size() != static_cast<Eigen::Index>(nodes_per_axis) * nodes_per_axis)
    throw std::invalid_argument("write_field: size mismatch");
  std::ofstream out(path);
  if (!out) throw IoError("write_field: cannot open " + path.string());
  out << nodes_per_axis << " " << nodes_per_axis << "\n";
  for (Eigen::Index i = 0; i < nodal.size(); ++i)
    out << format_double(nodal[i].real()) << " "
        << format_double(nodal[i].imag()) << "\n";
  if (!out) throw IoError("write_field: write failed for " + path.string());
}

CVector read_field(const std::filesystem::path& path, int* nodes_per_axis) {
  std::ifstream in(path);
  if (!in) throw IoError("read_field: cannot open " + path.string());
  int nx = 0, ny = 0;
  if (!(in >> nx >> ny) || nx <= 0 || ny <= 0 || nx != ny)
    throw IoError("read_field: bad header in " + path.string());
  CVector v(static_cast<Eigen::Index>(nx) * ny);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double re = 0, im = 0;
    if (!(in >> re >> im))
      throw IoError("read_field: truncated data in " + path.string());
    v[i] = Complex(re, im);
  }
  if (nodes_per_axis) *nodes_per_axis = nx;
  return v;
}

void write_raster(const std::filesystem::path& path, const Raster& r) {
  std::ofstream out(path);
  if (!out) throw IoError("write_raster: cannot open " + path.string());
  out << r.nx << " " << r.ny << "\n";
  for (int iy = 0; iy < r.ny; ++iy) {
    for (int ix = 0; ix < r.nx; ++ix) {
      out << format_double(r.values[static_cast<size_t>(iy) * r.nx + ix]);
      out << (ix + 1 == r.nx ? "\n" : " ");
    }
  }
  if (!out) throw IoError("write_raster: write failed for " + path.string());
}

Raster read_raster(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_raster: cannot open " + path.string());
  Raster r;
  if (!(in >> r.nx >> r.ny) || r.nx <= 0 || r.ny <= 0)
    throw IoError("read_raster: bad header in " + path.string());
  r.values.resize(static_cast<size_t>(r.nx) * r.ny);
  for (auto& v : r.values)
    if (!(in >> v))
      throw IoError("read_raster: truncated data in " + path.string());
  return r;
}

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("write_csv: cannot open " + path.string());
  auto write_row = [&](const std::vector<std::string>& row) {
    for (size_t i = 0; i < row.size(); ++i)
      out << row[i] << (i + 1 == row.size() ? "\n" : ",");
  };
  write_row(header);
  for (const auto& row : rows) write_row(row);
  if (!out) throw IoError("write_csv: write failed for " + path.string());
}

std::vector<std::vector<std::string>> read_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_csv: cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

uint64_t fnv1a64(const void* data, size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = 0xcbf29ce484222325ull;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

namespace {

constexpr char kCacheMagic[8] = {'H', 'L', 'O', 'D', 'C', '0', '1', '\0'};

uint64_t snapshot_key(int element, int layers, int fine_cells,
                      const double* snapshot, size_t count) {
  uint64_t h = fnv1a64(snapshot, count * sizeof(double));
  const int meta[3] = {element, layers, fine_cells};
  h ^= fnv1a64(meta, sizeof(meta));
  return h;
}

}  // namespace

CorrectorCache::CorrectorCache(std::filesystem::path dir)
    : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("CorrectorCache: cannot create " + dir_.string());
}

uint64_t CorrectorCache::weight_key(const MeshHierarchy& hier, int element,
                                    int layers,
                                    const CoefficientField& kerr_weight) {
  const Patch patch = make_patch(hier, element, layers);
  std::vector<double> slice;
  slice.reserve(patch.fine_elements.size());
  for (int e : patch.fine_elements) slice.push_back(kerr_weight.values[e]);
  return snapshot_key(element, layers, hier.fine.cells, slice.data(),
                      slice.size());
}

std::filesystem::path CorrectorCache::path_for(int element, int layers,
                                               uint64_t key) const {
  char name[64];
  std::snprintf(name, sizeof(name), "corr_%d_%d_%016llx.bin", element, layers,
                static_cast<unsigned long long>(key));
  return dir_ / name;
}

void CorrectorCache::store(const MeshHierarchy& hier,
                           const ElementCorrector& c) const {
  const uint64_t key =
      snapshot_key(c.element, c.layers, hier.fine.cells,
                   c.weight_snapshot.data(), c.weight_snapshot.size());
  const auto path = path_for(c.element, c.layers, key);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("CorrectorCache: cannot write " + path.string());
  out.write(kCacheMagic, 8);
  const int32_t meta[4] = {c.element, c.layers,
                           static_cast<int32_t>(c.fine_dofs.size()),
                           static_cast<int32_t>(c.patch_fine_elements.size())};
  out.write(reinterpret_cast<const char*>(meta), sizeof(meta));
  out.write(reinterpret_cast<const char*>(c.fine_dofs.data()),
            static_cast<std::streamsize>(c.fine_dofs.size() * sizeof(int)));
  out.write(reinterpret_cast<const char*>(c.basis_corrections.data()),
            static_cast<std::streamsize>(c.fine_dofs.size()) * 4 *
                sizeof(Complex));
  out.write(
      reinterpret_cast<const char*>(c.patch_fine_elements.data()),
      static_cast<std::streamsize>(c.patch_fine_elements.size() * sizeof(int)));
  out.write(reinterpret_cast<const char*>(c.weight_snapshot.data()),
            static_cast<std::streamsize>(c.weight_snapshot.size() *
                                         sizeof(double)));
  if (!out) throw IoError("CorrectorCache: write failed for " + path.string());
}

bool CorrectorCache::load(const MeshHierarchy& hier, int element, int layers,
                          const CoefficientField& kerr_weight,
                          ElementCorrector& out) const {
  const uint64_t key = weight_key(hier, element, layers, kerr_weight);
  const auto path = path_for(element, layers, key);
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kCacheMagic, 8) != 0) return false;
  int32_t meta[4];
  in.read(reinterpret_cast<char*>(meta), sizeof(meta));
  if (!in || meta[0] != element || meta[1] != layers) return false;
  const int n_dofs = meta[2], n_elems = meta[3];
  out.element = element;
  out.layers = layers;
  out.fine_dofs.resize(n_dofs);
  out.basis_corrections.resize(n_dofs, 4);
  out.patch_fine_elements.resize(n_elems);
  out.weight_snapshot.resize(n_elems);
  in.read(reinterpret_cast<char*>(out.fine_dofs.data()),
          n_dofs * sizeof(int));
  in.read(reinterpret_cast<char*>(out.basis_corrections.data()),
          static_cast<std::streamsize>(n_dofs) * 4 * sizeof(Complex));
  in.read(reinterpret_cast<char*>(out.patch_fine_elements.data()),
          n_elems * sizeof(int));
  in.read(reinterpret_cast<char*>(out.weight_snapshot.data()),
          n_elems * sizeof(double));
  return static_cast<bool>(in);
}

}  // namespace hlod
