#pragma once

#include <array>
#include <string>
#include <vector>

#include "json.hpp"
#include "regmark/types.hpp"

namespace regmark {

/// Regular axis-aligned lattice. Node (i, j[, k]) sits at
/// origin + spacing .* (i, j[, k]); flat indices run with x fastest.
struct GridGeometry {
  Vec origin;
  Vec spacing;
  std::vector<int> shape;

  int dimension() const { return static_cast<int>(shape.size()); }
  std::size_t node_count() const;
  Vec node(std::size_t flat) const;
  std::vector<int> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::vector<int>& index) const;

  /// True when p lies inside the closed bounding box of the nodes.
  bool contains(const Vec& p, double margin = 0.0) const;

  /// Continuous index coordinates of p.
  Vec to_index(const Vec& p) const;

  /// Every `stride`-th node along each axis (always keeping node 0).
  GridGeometry strided(int stride) const;

  void validate() const;

  /// Unit-spacing lattice at the origin, e.g. the pixel grid of an image.
  static GridGeometry pixels(std::vector<int> shape);

  friend bool operator==(const GridGeometry& a, const GridGeometry& b) {
    return a.shape == b.shape && a.origin == b.origin && a.spacing == b.spacing;
  }
};

void to_json(nlohmann::json& j, const GridGeometry& g);
void from_json(const nlohmann::json& j, GridGeometry& g);

/// Multilinear interpolation weights for a point: up to 2^d (flat index,
/// weight) pairs. Coordinates are clamped to the lattice.
struct Stencil {
  std::array<std::size_t, 8> index{};
  std::array<double, 8> weight{};
  int count = 0;
};
Stencil interpolation_stencil(const GridGeometry& g, const Vec& p);

/// Scalar field on a lattice (images, error and entropy maps).
struct ScalarImage {
  GridGeometry geometry;
  std::vector<double> values;

  double sample(const Vec& p) const;
  double min() const;
  double max() const;
};

/// Dense transformation phi(x) = x + u(x), with u stored per component on a
/// lattice and interpolated multilinearly. Outside the lattice hull the
/// displacement is clamped to the border value.
class TransformField {
 public:
  TransformField() = default;
  explicit TransformField(GridGeometry geometry);

  static TransformField identity(const GridGeometry& geometry) { return TransformField(geometry); }

  const GridGeometry& geometry() const { return geometry_; }
  int dimension() const { return geometry_.dimension(); }

  std::vector<double>& component(int c) { return components_[static_cast<std::size_t>(c)]; }
  const std::vector<double>& component(int c) const {
    return components_[static_cast<std::size_t>(c)];
  }

  Vec displacement(const Vec& p) const;
  Vec operator()(const Vec& p) const { return p + displacement(p); }
  Vec displacement_at_node(std::size_t flat) const;
  bool contains(const Vec& p) const { return geometry_.contains(p); }

  /// Adapter usable wherever a PointMap is expected.
  PointMap as_map() const;

  /// Max displacement norm over nodes.
  double max_norm() const;

 private:
  GridGeometry geometry_;
  std::vector<std::vector<double>> components_;
};

/// Displacement of (id + outer) o (id + inner) sampled on inner's lattice.
/// Both fields must share a geometry; 2-D unit-spacing fields use the SIMD
/// kernel.
TransformField compose(const TransformField& outer, const TransformField& inner);

/// Raw little-endian float32 data plus a JSON header
/// {shape, spacing, origin, dtype, components}. `base` gets ".json"/".raw".
void save_field(const std::string& base, const TransformField& field);
TransformField load_field(const std::string& header_path);

void save_volume(const std::string& base, const ScalarImage& image);
ScalarImage load_volume(const std::string& header_path);

}  // namespace regmark
