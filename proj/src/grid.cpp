#include "regmark/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "regmark/simd/dispatch.hpp"

namespace regmark {

std::size_t GridGeometry::node_count() const {
  std::size_t n = shape.empty() ? 0 : 1;
  for (int s : shape) n *= static_cast<std::size_t>(s);
  return n;
}

std::vector<int> GridGeometry::unflatten(std::size_t flat) const {
  std::vector<int> idx(shape.size());
  for (std::size_t a = 0; a < shape.size(); ++a) {
    idx[a] = static_cast<int>(flat % static_cast<std::size_t>(shape[a]));
    flat /= static_cast<std::size_t>(shape[a]);
  }
  return idx;
}

std::size_t GridGeometry::flatten(const std::vector<int>& index) const {
  std::size_t flat = 0;
  for (std::size_t a = shape.size(); a-- > 0;) {
    flat = flat * static_cast<std::size_t>(shape[a]) + static_cast<std::size_t>(index[a]);
  }
  return flat;
}

Vec GridGeometry::node(std::size_t flat) const {
  const auto idx = unflatten(flat);
  Vec p(dimension());
  for (int a = 0; a < dimension(); ++a) p(a) = origin(a) + spacing(a) * idx[static_cast<std::size_t>(a)];
  return p;
}

bool GridGeometry::contains(const Vec& p, double margin) const {
  if (p.size() != dimension()) return false;
  for (int a = 0; a < dimension(); ++a) {
    const double lo = origin(a) + margin;
    const double hi = origin(a) + spacing(a) * (shape[static_cast<std::size_t>(a)] - 1) - margin;
    if (!(p(a) >= lo && p(a) <= hi)) return false;
  }
  return true;
}

Vec GridGeometry::to_index(const Vec& p) const {
  return ((p - origin).array() / spacing.array()).matrix();
}

GridGeometry GridGeometry::strided(int stride) const {
  if (stride < 1) throw ValidationError("invalid_grid", "stride must be at least 1");
  GridGeometry g = *this;
  for (std::size_t a = 0; a < shape.size(); ++a) {
    g.shape[a] = (shape[a] - 1) / stride + 1;
    g.spacing(static_cast<Eigen::Index>(a)) *= stride;
  }
  return g;
}

void GridGeometry::validate() const {
  const int d = dimension();
  if (d != 2 && d != 3) throw ValidationError("invalid_grid", "grid dimension must be 2 or 3");
  if (origin.size() != d || spacing.size() != d) {
    throw ValidationError("invalid_grid", "grid origin/spacing must match shape");
  }
  for (int a = 0; a < d; ++a) {
    if (shape[static_cast<std::size_t>(a)] < 1 || !(spacing(a) > 0.0)) {
      throw ValidationError("invalid_grid", "grid shape and spacing must be positive");
    }
  }
}

GridGeometry GridGeometry::pixels(std::vector<int> shape) {
  GridGeometry g;
  const auto d = static_cast<Eigen::Index>(shape.size());
  g.origin = Vec::Zero(d);
  g.spacing = Vec::Ones(d);
  g.shape = std::move(shape);
  return g;
}

void to_json(nlohmann::json& j, const GridGeometry& g) {
  j = nlohmann::json{{"shape", g.shape},
                     {"spacing", std::vector<double>(g.spacing.data(), g.spacing.data() + g.spacing.size())},
                     {"origin", std::vector<double>(g.origin.data(), g.origin.data() + g.origin.size())}};
}

void from_json(const nlohmann::json& j, GridGeometry& g) {
  g.shape = j.at("shape").get<std::vector<int>>();
  const auto d = static_cast<Eigen::Index>(g.shape.size());
  const auto spacing = j.contains("spacing") ? j.at("spacing").get<std::vector<double>>()
                                             : std::vector<double>(g.shape.size(), 1.0);
  const auto origin = j.contains("origin") ? j.at("origin").get<std::vector<double>>()
                                           : std::vector<double>(g.shape.size(), 0.0);
  if (static_cast<Eigen::Index>(spacing.size()) != d || static_cast<Eigen::Index>(origin.size()) != d) {
    throw ValidationError("invalid_grid", "grid header: spacing/origin length mismatch");
  }
  g.spacing = Eigen::Map<const Vec>(spacing.data(), d);
  g.origin = Eigen::Map<const Vec>(origin.data(), d);
  g.validate();
}

Stencil interpolation_stencil(const GridGeometry& g, const Vec& p) {
  const int d = g.dimension();
  std::array<int, 3> base{};
  std::array<int, 3> next{};
  std::array<double, 3> frac{};
  const Vec u = g.to_index(p);
  for (int a = 0; a < d; ++a) {
    const int n = g.shape[static_cast<std::size_t>(a)];
    const double c = std::clamp(u(a), 0.0, static_cast<double>(n - 1));
    const int b = std::min(static_cast<int>(std::floor(c)), std::max(n - 2, 0));
    base[a] = b;
    next[a] = std::min(b + 1, n - 1);
    frac[a] = c - b;
  }
  Stencil st;
  st.count = 1 << d;
  std::vector<int> idx(static_cast<std::size_t>(d));
  for (int corner = 0; corner < st.count; ++corner) {
    double w = 1.0;
    for (int a = 0; a < d; ++a) {
      const bool hi = (corner >> a) & 1;
      idx[static_cast<std::size_t>(a)] = hi ? next[a] : base[a];
      w *= hi ? frac[a] : 1.0 - frac[a];
    }
    st.index[corner] = g.flatten(idx);
    st.weight[corner] = w;
  }
  return st;
}

double ScalarImage::sample(const Vec& p) const {
  const Stencil st = interpolation_stencil(geometry, p);
  double v = 0.0;
  for (int c = 0; c < st.count; ++c) v += st.weight[c] * values[st.index[c]];
  return v;
}

double ScalarImage::min() const { return *std::min_element(values.begin(), values.end()); }
double ScalarImage::max() const { return *std::max_element(values.begin(), values.end()); }

TransformField::TransformField(GridGeometry geometry) : geometry_(std::move(geometry)) {
  geometry_.validate();
  components_.assign(static_cast<std::size_t>(geometry_.dimension()),
                     std::vector<double>(geometry_.node_count(), 0.0));
}

Vec TransformField::displacement(const Vec& p) const {
  require_dimension(p, dimension(), "TransformField");
  const Stencil st = interpolation_stencil(geometry_, p);
  Vec u = Vec::Zero(dimension());
  for (int c = 0; c < st.count; ++c) {
    for (int a = 0; a < dimension(); ++a) {
      u(a) += st.weight[c] * components_[static_cast<std::size_t>(a)][st.index[c]];
    }
  }
  return u;
}

Vec TransformField::displacement_at_node(std::size_t flat) const {
  Vec u(dimension());
  for (int a = 0; a < dimension(); ++a) u(a) = components_[static_cast<std::size_t>(a)][flat];
  return u;
}

PointMap TransformField::as_map() const {
  return [field = *this](const Vec& p) { return field(p); };
}

double TransformField::max_norm() const {
  double best = 0.0;
  for (std::size_t n = 0; n < geometry_.node_count(); ++n) {
    best = std::max(best, displacement_at_node(n).norm());
  }
  return best;
}

TransformField compose(const TransformField& outer, const TransformField& inner) {
  if (!(outer.geometry() == inner.geometry())) {
    throw DimensionError("compose: fields must share a lattice");
  }
  const GridGeometry& g = inner.geometry();
  TransformField out(g);
  const bool unit_2d = g.dimension() == 2 && g.spacing.isOnes() && g.origin.isZero();
  if (unit_2d) {
    const simd::Field2d o{outer.component(0), outer.component(1), g.shape[0], g.shape[1]};
    const simd::Field2d i{inner.component(0), inner.component(1), g.shape[0], g.shape[1]};
    simd::compose_2d(o, i, out.component(0), out.component(1));
    return out;
  }
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    const Vec p = g.node(n);
    const Vec b = inner.displacement_at_node(n);
    const Vec u = b + outer.displacement(p + b);
    for (int a = 0; a < g.dimension(); ++a) out.component(a)[n] = u(a);
  }
  return out;
}

namespace {

void write_float32(std::ofstream& out, double v) {
  const float f = static_cast<float>(v);
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof bits);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
}

std::vector<double> read_samples(const std::string& raw_path, std::size_t count,
                                 const std::string& dtype) {
  std::ifstream in(raw_path, std::ios::binary);
  if (!in) throw ValidationError("io_error", "cannot open " + raw_path);
  std::vector<double> out(count);
  if (dtype == "float32") {
    for (auto& v : out) {
      std::uint32_t bits = 0;
      in.read(reinterpret_cast<char*>(&bits), sizeof bits);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
      float f;
      std::memcpy(&f, &bits, sizeof f);
      v = f;
    }
  } else if (dtype == "uint8") {
    for (auto& v : out) {
      unsigned char c = 0;
      in.read(reinterpret_cast<char*>(&c), 1);
      v = c;
    }
  } else {
    throw ValidationError("invalid_header", "unsupported dtype '" + dtype + "'");
  }
  if (!in) throw ValidationError("io_error", raw_path + " is shorter than its header says");
  return out;
}

std::string raw_path_for(const std::string& header_path, const nlohmann::json& header) {
  namespace fs = std::filesystem;
  if (header.contains("data")) {
    return (fs::path(header_path).parent_path() / header.at("data").get<std::string>()).string();
  }
  return fs::path(header_path).replace_extension(".raw").string();
}

nlohmann::json read_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("io_error", "cannot open " + path);
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("invalid_header", path + ": " + e.what());
  }
}

}  // namespace

void save_field(const std::string& base, const TransformField& field) {
  namespace fs = std::filesystem;
  nlohmann::json header = field.geometry();
  header["dtype"] = "float32";
  header["components"] = field.dimension();
  header["data"] = fs::path(base + ".raw").filename().string();
  std::ofstream(base + ".json") << header.dump(2) << '\n';
  std::ofstream out(base + ".raw", std::ios::binary);
  for (std::size_t n = 0; n < field.geometry().node_count(); ++n) {
    for (int a = 0; a < field.dimension(); ++a) write_float32(out, field.component(a)[n]);
  }
  if (!out) throw ValidationError("io_error", "cannot write " + base + ".raw");
}

TransformField load_field(const std::string& header_path) {
  const auto header = read_header(header_path);
  try {
    TransformField field(header.get<GridGeometry>());
    const int d = field.dimension();
    if (header.value("components", d) != d) {
      throw ValidationError("invalid_header", "field components must equal the grid dimension");
    }
    const auto n = field.geometry().node_count();
    const auto data = read_samples(raw_path_for(header_path, header), n * static_cast<std::size_t>(d),
                                   header.value("dtype", std::string("float32")));
    for (std::size_t i = 0; i < n; ++i) {
      for (int a = 0; a < d; ++a) field.component(a)[i] = data[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(a)];
    }
    return field;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("invalid_header", header_path + ": " + e.what());
  }
}

void save_volume(const std::string& base, const ScalarImage& image) {
  namespace fs = std::filesystem;
  nlohmann::json header = image.geometry;
  header["dtype"] = "float32";
  header["data"] = fs::path(base + ".raw").filename().string();
  std::ofstream(base + ".json") << header.dump(2) << '\n';
  std::ofstream out(base + ".raw", std::ios::binary);
  for (double v : image.values) write_float32(out, v);
  if (!out) throw ValidationError("io_error", "cannot write " + base + ".raw");
}

ScalarImage load_volume(const std::string& header_path) {
  const auto header = read_header(header_path);
  try {
    ScalarImage img;
    img.geometry = header.get<GridGeometry>();
    img.values = read_samples(raw_path_for(header_path, header), img.geometry.node_count(),
                              header.value("dtype", std::string("float32")));
    return img;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("invalid_header", header_path + ": " + e.what());
  }
}

}  // namespace regmark
