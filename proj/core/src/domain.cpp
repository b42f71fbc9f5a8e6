#include "pmod/domain.hpp"

#include <cmath>
#include <stdexcept>

namespace pmod {

bool Box::contains(const Point& x) const {
  if (x.size() != lo.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  return true;
}

Box Box::hull(const Box& a, const Box& b) {
  return Box{a.lo.cwiseMin(b.lo), a.hi.cwiseMax(b.hi)};
}

double CombParams::tooth_abscissa(int k) const {
  return base.lo[0] + width / k;
}

double CombParams::tooth_halfwidth(int k) const {
  if (!halfwidths.empty()) return halfwidths.at(k - 1);
  return width / (8.0 * k * k);
}

Point CombParams::tooth_anchor(int k, double height_fraction) const {
  Point p = base.center();
  p[0] = tooth_abscissa(k);
  p[1] = base.lo[1] +
         height_fraction * slit_height * (base.hi[1] - base.lo[1]);
  return p;
}

void CombParams::validate() const {
  if (base.dim() < 2) throw std::invalid_argument("comb: base must have n >= 2");
  if (teeth_count < 1) throw std::invalid_argument("comb: teeth_count < 1");
  if (slit_height <= 0.0 || slit_height >= 1.0)
    throw std::invalid_argument("comb: slit_height outside (0,1)");
  if (width <= 0.0) throw std::invalid_argument("comb: width <= 0");
  if (!halfwidths.empty() &&
      static_cast<int>(halfwidths.size()) != teeth_count)
    throw std::invalid_argument("comb: halfwidths size != teeth_count");
  for (int k = 1; k <= teeth_count; ++k) {
    if (tooth_halfwidth(k) <= 0.0)
      throw std::invalid_argument("comb: nonpositive tooth halfwidth");
    if (k < teeth_count) {
      // adjacent teeth must not touch
      if (tooth_abscissa(k + 1) + tooth_halfwidth(k + 1) >=
          tooth_abscissa(k) - tooth_halfwidth(k))
        throw std::invalid_argument("comb: overlapping teeth");
    }
  }
  if (tooth_abscissa(1) + tooth_halfwidth(1) > base.hi[0])
    throw std::invalid_argument("comb: tooth 1 leaves the base box");
}

namespace {

enum class Kind {
  kBall,
  kBox,
  kRing,
  kHalfSpace,
  kComb,
  kUnion,
  kIntersection,
  kDifference,
  kMapped
};

}  // namespace

struct Domain::Node {
  Kind kind;
  // primitives
  Point center;           // ball, ring
  double radius = 0.0;    // ball
  double r1 = 0.0, r2 = 0.0;  // ring
  Box boxv{Point(), Point()};  // box / comb base / cached bbox
  Point normal;           // halfspace
  double offset = 0.0;    // halfspace
  CombParams comb;        // comb
  // combinators
  std::shared_ptr<const Node> left, right;
  // mapped
  std::function<Point(const Point&)> inverse;
  Box bbox{Point(), Point()};

  bool contains(const Point& x) const {
    switch (kind) {
      case Kind::kBall:
        return (x - center).norm() < radius;
      case Kind::kBox:
        return boxv.contains(x);
      case Kind::kRing: {
        const double d = (x - center).norm();
        return d > r1 && d < r2;
      }
      case Kind::kHalfSpace:
        return normal.dot(x) <= offset;
      case Kind::kComb: {
        if (!comb.base.contains(x)) return false;
        const double slit_y =
            comb.base.lo[1] +
            comb.slit_height * (comb.base.hi[1] - comb.base.lo[1]);
        if (x[1] >= slit_y) return true;  // connecting strip
        for (int k = 1; k <= comb.teeth_count; ++k) {
          if (std::abs(x[0] - comb.tooth_abscissa(k)) <=
              comb.tooth_halfwidth(k))
            return true;
        }
        return false;
      }
      case Kind::kUnion:
        return left->contains(x) || right->contains(x);
      case Kind::kIntersection:
        return left->contains(x) && right->contains(x);
      case Kind::kDifference:
        return left->contains(x) && !right->contains(x);
      case Kind::kMapped:
        return left->contains(inverse(x));
    }
    return false;
  }

  Box bounding_box() const {
    switch (kind) {
      case Kind::kBall: {
        Point r = Point::Constant(center.size(), radius);
        return Box{center - r, center + r};
      }
      case Kind::kBox:
        return boxv;
      case Kind::kRing: {
        Point r = Point::Constant(center.size(), r2);
        return Box{center - r, center + r};
      }
      case Kind::kHalfSpace: {
        const double big = 1e30;
        Point lo = Point::Constant(normal.size(), -big);
        Point hi = Point::Constant(normal.size(), big);
        return Box{lo, hi};
      }
      case Kind::kComb:
        return comb.base;
      case Kind::kUnion:
        return Box::hull(left->bounding_box(), right->bounding_box());
      case Kind::kIntersection: {
        Box a = left->bounding_box();
        Box b = right->bounding_box();
        return Box{a.lo.cwiseMax(b.lo), a.hi.cwiseMin(b.hi)};
      }
      case Kind::kDifference:
        return left->bounding_box();
      case Kind::kMapped:
        return bbox;
    }
    return boxv;
  }
};

bool Domain::contains(const Point& x) const { return node_->contains(x); }
Box Domain::bounding_box() const { return node_->bounding_box(); }

int Domain::dim() const {
  Box b = bounding_box();
  return b.dim();
}

const CombParams* Domain::comb_params() const {
  return node_->kind == Kind::kComb ? &node_->comb : nullptr;
}

Domain Domain::ball(Point center, double radius) {
  if (radius <= 0.0) throw std::invalid_argument("ball: radius <= 0");
  auto n = std::make_shared<Node>();
  n->kind = Kind::kBall;
  n->center = std::move(center);
  n->radius = radius;
  return Domain(std::move(n));
}

Domain Domain::box(Point lo, Point hi) {
  if (lo.size() != hi.size() || ((hi - lo).array() < 0.0).any())
    throw std::invalid_argument("box: invalid corners");
  auto n = std::make_shared<Node>();
  n->kind = Kind::kBox;
  n->boxv = Box{std::move(lo), std::move(hi)};
  return Domain(std::move(n));
}

Domain Domain::box(const Box& b) { return box(b.lo, b.hi); }

Domain Domain::ring(Point center, double r1, double r2) {
  if (!(0.0 < r1 && r1 < r2)) throw std::invalid_argument("ring: need 0 < r1 < r2");
  auto n = std::make_shared<Node>();
  n->kind = Kind::kRing;
  n->center = std::move(center);
  n->r1 = r1;
  n->r2 = r2;
  return Domain(std::move(n));
}

Domain Domain::halfspace(Point normal, double offset) {
  if (normal.norm() == 0.0) throw std::invalid_argument("halfspace: zero normal");
  auto n = std::make_shared<Node>();
  n->kind = Kind::kHalfSpace;
  n->normal = std::move(normal);
  n->offset = offset;
  return Domain(std::move(n));
}

Domain Domain::comb(CombParams params) {
  params.validate();
  auto n = std::make_shared<Node>();
  n->kind = Kind::kComb;
  n->comb = std::move(params);
  return Domain(std::move(n));
}

Domain Domain::unite(Domain a, Domain b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kUnion;
  n->left = std::move(a.node_);
  n->right = std::move(b.node_);
  return Domain(std::move(n));
}

Domain Domain::intersect(Domain a, Domain b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kIntersection;
  n->left = std::move(a.node_);
  n->right = std::move(b.node_);
  return Domain(std::move(n));
}

Domain Domain::subtract(Domain a, Domain b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kDifference;
  n->left = std::move(a.node_);
  n->right = std::move(b.node_);
  return Domain(std::move(n));
}

Domain Domain::mapped(Domain pre, std::function<Point(const Point&)> inverse,
                      Box image_bbox) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kMapped;
  n->left = std::move(pre.node_);
  n->inverse = std::move(inverse);
  n->bbox = std::move(image_bbox);
  return Domain(std::move(n));
}

namespace {

nlohmann::json vec_to_json(const Point& p) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) a.push_back(p[i]);
  return a;
}

Point vec_from_json(const nlohmann::json& j, const char* where) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument(std::string("domain json: ") + where +
                                " must be a nonempty array");
  Point p(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) p[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return p;
}

}  // namespace

nlohmann::json Domain::to_json() const {
  const Node& n = *node_;
  nlohmann::json j;
  switch (n.kind) {
    case Kind::kBall:
      j["type"] = "ball";
      j["center"] = vec_to_json(n.center);
      j["radius"] = n.radius;
      break;
    case Kind::kBox:
      j["type"] = "box";
      j["min"] = vec_to_json(n.boxv.lo);
      j["max"] = vec_to_json(n.boxv.hi);
      break;
    case Kind::kRing:
      j["type"] = "ring";
      j["center"] = vec_to_json(n.center);
      j["r1"] = n.r1;
      j["r2"] = n.r2;
      break;
    case Kind::kHalfSpace:
      j["type"] = "halfspace";
      j["normal"] = vec_to_json(n.normal);
      j["offset"] = n.offset;
      break;
    case Kind::kComb:
      j["type"] = "comb";
      j["base_min"] = vec_to_json(n.comb.base.lo);
      j["base_max"] = vec_to_json(n.comb.base.hi);
      j["teeth"] = n.comb.teeth_count;
      j["slit_height"] = n.comb.slit_height;
      j["width"] = n.comb.width;
      if (!n.comb.halfwidths.empty()) j["halfwidths"] = n.comb.halfwidths;
      break;
    case Kind::kUnion:
    case Kind::kIntersection:
    case Kind::kDifference:
      j["type"] = n.kind == Kind::kUnion          ? "union"
                  : n.kind == Kind::kIntersection ? "intersection"
                                                  : "difference";
      j["children"] = nlohmann::json::array(
          {Domain(n.left).to_json(), Domain(n.right).to_json()});
      break;
    case Kind::kMapped:
      throw std::invalid_argument("domain json: mapped domains are not serializable");
  }
  return j;
}

Domain Domain::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type"))
    throw std::invalid_argument("domain json: missing \"type\"");
  const std::string type = j.at("type").get<std::string>();
  if (type == "ball")
    return ball(vec_from_json(j.at("center"), "center"),
                j.at("radius").get<double>());
  if (type == "box")
    return box(vec_from_json(j.at("min"), "min"),
               vec_from_json(j.at("max"), "max"));
  if (type == "ring")
    return ring(vec_from_json(j.at("center"), "center"),
                j.at("r1").get<double>(), j.at("r2").get<double>());
  if (type == "halfspace")
    return halfspace(vec_from_json(j.at("normal"), "normal"),
                     j.at("offset").get<double>());
  if (type == "comb") {
    CombParams c;
    c.base = Box{vec_from_json(j.at("base_min"), "base_min"),
                 vec_from_json(j.at("base_max"), "base_max")};
    c.teeth_count = j.at("teeth").get<int>();
    c.slit_height = j.at("slit_height").get<double>();
    c.width = j.value("width", 1.0);
    if (j.contains("halfwidths"))
      c.halfwidths = j.at("halfwidths").get<std::vector<double>>();
    return comb(std::move(c));
  }
  if (type == "union" || type == "intersection" || type == "difference") {
    const auto& ch = j.at("children");
    if (!ch.is_array() || ch.size() != 2)
      throw std::invalid_argument("domain json: \"children\" must have 2 entries");
    Domain a = from_json(ch[0]);
    Domain b = from_json(ch[1]);
    if (type == "union") return unite(std::move(a), std::move(b));
    if (type == "intersection") return intersect(std::move(a), std::move(b));
    return subtract(std::move(a), std::move(b));
  }
  throw std::invalid_argument("domain json: unknown type \"" + type + "\"");
}

}  // namespace pmod
