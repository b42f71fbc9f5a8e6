#pragma once

#include <functional>
#include <memory>
#include <nlohmann/json.hpp>
#include <vector>

#include "pmod/geometry.hpp"

namespace pmod {

/// Axis-aligned box [lo, hi].
struct Box {
  Point lo;
  Point hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Point& x) const;
  Point center() const { return 0.5 * (lo + hi); }
  static Box hull(const Box& a, const Box& b);
};

/// Finite truncation of a comb-type domain: a strip connected to teeth_count
/// thin teeth reaching toward the base corner. Tooth k hangs at abscissa
/// width / k; the region below the slit line decomposes into one component
/// per tooth once intersected with a small enough ball at the corner.
struct CombParams {
  Box base;                        // extruded to all coordinates for n > 2
  int teeth_count = 1;             // k_max >= 1
  double slit_height = 0.5;        // fraction of base height, in (0,1)
  double width = 1.0;              // tooth k abscissa = base.lo[0] + width/k
  std::vector<double> halfwidths;  // per tooth; empty = width/(8 k^2)

  double tooth_abscissa(int k) const;
  double tooth_halfwidth(int k) const;
  /// A point deterministically inside tooth k, used to match flood-fill
  /// components to teeth across resolutions.
  Point tooth_anchor(int k, double height_fraction = 0.25) const;
  void validate() const;  // throws on overlapping teeth etc.
};

/// Immutable symbolic region: primitives combined by set operations, with a
/// total membership predicate and a bounding box.
class Domain {
 public:
  bool contains(const Point& x) const;
  Box bounding_box() const;
  int dim() const;

  static Domain ball(Point center, double radius);
  static Domain box(Point lo, Point hi);
  static Domain box(const Box& b);
  static Domain ring(Point center, double r1, double r2);
  /// Half-space {x : normal . x <= offset}.
  static Domain halfspace(Point normal, double offset);
  static Domain comb(CombParams params);
  static Domain unite(Domain a, Domain b);
  static Domain intersect(Domain a, Domain b);
  static Domain subtract(Domain a, Domain b);
  /// Image of `pre` under a homeomorphism given by its inverse map.
  /// Not serializable to JSON.
  static Domain mapped(Domain pre, std::function<Point(const Point&)> inverse,
                       Box image_bbox);

  const CombParams* comb_params() const;  // non-null only for comb nodes

  nlohmann::json to_json() const;
  static Domain from_json(const nlohmann::json& j);

 private:
  struct Node;
  explicit Domain(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

}  // namespace pmod
