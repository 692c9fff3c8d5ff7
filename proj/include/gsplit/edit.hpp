#pragma once

#include "gsplit/core.hpp"
#include "gsplit/metrics.hpp"

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace gsplit {

enum class EditStrategy { Ours, Move, Remove, Filter };

/// Triangular prism: triangle swept along `axis` (unit) by `extent`.
struct Prism {
    std::array<Vec3, 3> triangle{};
    Vec3 axis = Vec3::UnitZ();
    double extent = 1.0;
};

/// Closed surface B(x) = 0 with B < 0 inside. Sphere and ellipsoid carry
/// exact closest-point solvers; generic surfaces use the damped-gradient
/// projection x <- x - B(x) grad B / |grad B|^2.
class ImplicitSurface {
public:
    ImplicitSurface() = default;

    static ImplicitSurface sphere(const Vec3& center, double radius);
    static ImplicitSurface ellipsoid(const Vec3& center, const Vec3& semiaxes);
    static ImplicitSurface generic(std::function<double(const Vec3&)> value,
                                   std::function<Vec3(const Vec3&)> gradient);

    double value(const Vec3& x) const;
    Vec3 gradient(const Vec3& x) const;

    /// Closest surface point to x. Throws ProjectionDivergedError when the
    /// generic iteration fails to reach |B| <= 1e-9 in 50 steps.
    Vec3 closest_point(const Vec3& x) const;

private:
    enum class Kind { Sphere, Ellipsoid, Generic };
    Kind kind_ = Kind::Sphere;
    Vec3 center_ = Vec3::Zero();
    Vec3 semiaxes_ = Vec3::Ones(); // radius replicated for spheres
    std::function<double(const Vec3&)> value_;
    std::function<Vec3(const Vec3&)> gradient_;
};

/// A fully-parsed edit request.
struct EditSpec {
    enum class Kind { PlaneSplit, PolygonDelete, CurveDelete };
    Kind kind = Kind::PlaneSplit;
    EditStrategy strategy = EditStrategy::Ours;
    int repeat = 1; // 1..3

    Plane plane;      // PlaneSplit
    double gap = 0.0; // PlaneSplit
    Prism prism;            // PolygonDelete
    ImplicitSurface surface; // CurveDelete
};

/// Edited model plus the evaluated records behind the report so callers can
/// re-check them (Monte Carlo, invariance tests).
struct EditOutcome {
    SplatModel model;
    EditReport report;
    std::vector<SplitRecord> records;
};

/// Split every splat crossing the plane (ours), or apply the move/remove
/// baselines, then pull the two sides apart by +-gap/2 along the normal.
/// Metrics are evaluated in the unmoved frame.
EditOutcome plane_split_edit(const SplatModel& m, const Plane& p, double gap,
                             EditStrategy strategy, int repeat = 1);

/// Remove everything inside a triangular prism. Ours splits boundary splats
/// at the face planes first; filter only drops splats whose mean is inside.
/// Throws DegeneratePrismError for flat prisms.
EditOutcome polygon_delete_edit(const SplatModel& m, const Prism& prism, EditStrategy strategy,
                                int repeat = 1);

/// Remove everything inside a closed implicit surface, splitting boundary
/// splats at tangent planes of their closest surface points.
EditOutcome curve_delete_edit(const SplatModel& m, const ImplicitSurface& surface,
                              EditStrategy strategy, int repeat = 1);

/// Edge-projection test: does the segment AB pass within the influence
/// range of the splat?
bool segment_gaussian_intersects(const Gaussian& g, const Vec3& a, const Vec3& b);

/// Translate every splat whose mean lies on `side` of the plane by delta.
SplatModel translate_side(const SplatModel& m, const Plane& p, Side side, const Vec3& delta);

/// Parse an EditSpec from its JSON document form.
EditSpec parse_edit_spec(const std::string& json_text);

EditOutcome apply_edit(const SplatModel& m, const EditSpec& spec);

} // namespace gsplit
