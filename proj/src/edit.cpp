#include "gsplit/edit.hpp"
#include "gsplit/errors.hpp"
#include "gsplit/parallel.hpp"
#include "gsplit/split.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace gsplit {

namespace {

Side side_of(double d0) { return d0 < 0.0 ? Side::Negative : Side::Positive; }

// ---------------------------------------------------------------------------
// Boundary expansion shared by the ours-strategy edits. An entry tracks the
// current splat, its immediate parent and the plane of its last split; the
// root copy feeds the shrinking re-split threshold eta_root / 3^(round-1).
struct BoundaryEntry {
    Gaussian g;
    Gaussian parent;
    Gaussian root;
    Plane plane;
    bool is_child = false;
};

void split_entry(std::vector<BoundaryEntry>& out, const BoundaryEntry& e, const Plane& p) {
    auto [left, right] = split_ungated(e.g, p);
    out.push_back({std::move(left), e.g, e.root, p, true});
    out.push_back({std::move(right), e.g, e.root, p, true});
}

// Split descendants of one splat against a fixed plane, re-splitting children
// that stay within the shrunken threshold on later rounds.
std::vector<BoundaryEntry> expand_against_plane(const Gaussian& root, const Plane& p, int repeat) {
    std::vector<BoundaryEntry> entries{{root, root, root, p, false}};
    for (int round = 1; round <= repeat; ++round) {
        const double shrink = std::pow(3.0, round - 1);
        std::vector<BoundaryEntry> next;
        next.reserve(entries.size() * 2);
        bool changed = false;
        for (const BoundaryEntry& e : entries) {
            const double d0 = signed_distance(p, e.g.position);
            const double eta = influence_threshold(e.root, p.normal) / shrink;
            if (std::abs(d0) < eta) {
                split_entry(next, e, p);
                changed = true;
            } else {
                next.push_back(e);
            }
        }
        entries = std::move(next);
        if (!changed) break;
    }
    return entries;
}

SplitRecord make_record(const BoundaryEntry& e) {
    return SplitRecord{e.g, e.parent, side_of(signed_distance(e.plane, e.g.position)), e.plane};
}

void finish_report(EditOutcome& out) {
    if (!out.records.empty()) {
        out.report.e_i = interval_error(out.records);
        out.report.e_e = external_excess(out.records);
    }
}

// ---------------------------------------------------------------------------
// Prism machinery.

struct Face {
    Plane plane;                // outward-facing
    std::vector<Vec3> polygon;  // convex, any winding
};

std::vector<Face> prism_faces(const Prism& prism) {
    const Vec3 e01 = prism.triangle[1] - prism.triangle[0];
    const Vec3 e02 = prism.triangle[2] - prism.triangle[0];
    const Vec3 cross = e01.cross(e02);
    const double area2 = cross.norm();
    if (area2 < 1e-12) throw DegeneratePrismError("prism: zero-area triangle");
    const Vec3 tri_normal = cross / area2;
    if (std::abs(prism.axis.norm() - 1.0) > 1e-9) {
        throw ValueError("prism: axis must be a unit vector");
    }
    if (std::abs(tri_normal.dot(prism.axis)) < 1e-9 || prism.extent <= 0.0) {
        throw DegeneratePrismError("prism: extrusion produces no volume");
    }

    const Vec3 sweep = prism.extent * prism.axis;
    const Vec3 bottom_out = tri_normal.dot(prism.axis) > 0.0 ? -tri_normal : tri_normal;

    std::vector<Face> faces;
    faces.push_back({plane_through(bottom_out, prism.triangle[0]),
                     {prism.triangle[0], prism.triangle[1], prism.triangle[2]}});
    faces.push_back({plane_through(-bottom_out, prism.triangle[0] + sweep),
                     {prism.triangle[0] + sweep, prism.triangle[1] + sweep, prism.triangle[2] + sweep}});
    for (int i = 0; i < 3; ++i) {
        const Vec3 a = prism.triangle[static_cast<std::size_t>(i)];
        const Vec3 b = prism.triangle[static_cast<std::size_t>((i + 1) % 3)];
        const Vec3 c = prism.triangle[static_cast<std::size_t>((i + 2) % 3)];
        Vec3 n = (b - a).cross(prism.axis).normalized();
        if (n.dot(c - a) > 0.0) n = -n;
        faces.push_back({plane_through(n, a), {a, b, b + sweep, a + sweep}});
    }
    return faces;
}

bool inside_prism(const std::vector<Face>& faces, const Vec3& x) {
    for (const Face& f : faces) {
        if (signed_distance(f.plane, x) >= 0.0) return false;
    }
    return true;
}

// Projection of the splat center lies within the convex face polygon.
// Edge-sign test, independent of the polygon winding.
bool projects_into_polygon(const Face& face, const Vec3& x) {
    const Vec3 q = x - signed_distance(face.plane, x) * face.plane.normal;
    const std::size_t n = face.polygon.size();
    bool has_pos = false;
    bool has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3& a = face.polygon[i];
        const Vec3& b = face.polygon[(i + 1) % n];
        const double s = (b - a).cross(q - a).dot(face.plane.normal);
        has_pos |= s > 0.0;
        has_neg |= s < 0.0;
    }
    return !(has_pos && has_neg);
}

bool overlaps_face(const Gaussian& g, const Face& face) {
    if (projects_into_polygon(face, g.position)) return true;
    const std::size_t n = face.polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (segment_gaussian_intersects(g, face.polygon[i], face.polygon[(i + 1) % n])) return true;
    }
    return false;
}

} // namespace

// ---------------------------------------------------------------------------
// Implicit surfaces.

ImplicitSurface ImplicitSurface::sphere(const Vec3& center, double radius) {
    if (!(radius > 0.0)) throw ValueError("sphere: radius must be positive");
    ImplicitSurface s;
    s.kind_ = Kind::Sphere;
    s.center_ = center;
    s.semiaxes_ = Vec3::Constant(radius);
    return s;
}

ImplicitSurface ImplicitSurface::ellipsoid(const Vec3& center, const Vec3& semiaxes) {
    if (!(semiaxes.minCoeff() > 0.0)) throw ValueError("ellipsoid: semiaxes must be positive");
    ImplicitSurface s;
    s.kind_ = Kind::Ellipsoid;
    s.center_ = center;
    s.semiaxes_ = semiaxes;
    return s;
}

ImplicitSurface ImplicitSurface::generic(std::function<double(const Vec3&)> value,
                                         std::function<Vec3(const Vec3&)> gradient) {
    ImplicitSurface s;
    s.kind_ = Kind::Generic;
    s.value_ = std::move(value);
    s.gradient_ = std::move(gradient);
    return s;
}

double ImplicitSurface::value(const Vec3& x) const {
    switch (kind_) {
    case Kind::Sphere: {
        const Vec3 u = x - center_;
        return u.squaredNorm() - semiaxes_[0] * semiaxes_[0];
    }
    case Kind::Ellipsoid: {
        const Vec3 u = (x - center_).array() / semiaxes_.array();
        return u.squaredNorm() - 1.0;
    }
    case Kind::Generic:
        return value_(x);
    }
    return 0.0;
}

Vec3 ImplicitSurface::gradient(const Vec3& x) const {
    switch (kind_) {
    case Kind::Sphere:
        return 2.0 * (x - center_);
    case Kind::Ellipsoid:
        return 2.0 * ((x - center_).array() / semiaxes_.array().square()).matrix();
    case Kind::Generic:
        return gradient_(x);
    }
    return Vec3::Zero();
}

Vec3 ImplicitSurface::closest_point(const Vec3& x) const {
    switch (kind_) {
    case Kind::Sphere: {
        Vec3 u = x - center_;
        const double norm = u.norm();
        if (norm < 1e-300) u = Vec3::UnitX(); // center: any direction works
        else u /= norm;
        return center_ + semiaxes_[0] * u;
    }
    case Kind::Ellipsoid: {
        // Lagrange form y_i = a_i^2 u_i / (t + a_i^2); bisect the unique
        // root of g(t) = sum (a_i u_i / (t + a_i^2))^2 - 1 right of -a_min^2.
        Vec3 u = x - center_;
        const Vec3 a2 = semiaxes_.array().square();
        const double a_min2 = a2.minCoeff();
        int min_axis = 0;
        a2.minCoeff(&min_axis);
        if (std::abs(u[min_axis]) < 1e-12 * semiaxes_.minCoeff()) {
            u[min_axis] = 1e-12 * semiaxes_.minCoeff(); // off the medial axis
        }
        const auto g = [&](double t) {
            double s = 0.0;
            for (int i = 0; i < 3; ++i) {
                const double term = semiaxes_[i] * u[i] / (t + a2[i]);
                s += term * term;
            }
            return s - 1.0;
        };
        double lo = -a_min2;
        double hi = semiaxes_.maxCoeff() * (u.norm() + semiaxes_.maxCoeff());
        while (g(hi) > 0.0) hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            (g(mid) > 0.0 ? lo : hi) = mid;
        }
        const double t = 0.5 * (lo + hi);
        Vec3 y;
        for (int i = 0; i < 3; ++i) y[i] = a2[i] * u[i] / (t + a2[i]);
        return center_ + y;
    }
    case Kind::Generic: {
        Vec3 p = x;
        for (int it = 0; it < 50; ++it) {
            const double b = value_(p);
            if (std::abs(b) <= 1e-9) return p;
            const Vec3 grad = gradient_(p);
            const double gg = grad.squaredNorm();
            if (!(gg > 1e-300)) {
                throw ProjectionDivergedError("closest_point: vanishing gradient");
            }
            p -= (b / gg) * grad;
        }
        throw ProjectionDivergedError("closest_point: no convergence in 50 steps");
    }
    }
    return x;
}

// ---------------------------------------------------------------------------

bool segment_gaussian_intersects(const Gaussian& g, const Vec3& a, const Vec3& b) {
    const Vec3 ab = a - b;
    const double overlap = (a - g.position).dot(ab) * (b - g.position).dot(ab);
    Vec3 anchor;
    if (overlap <= 0.0) {
        // Projection falls inside the segment: test the perpendicular reach.
        const double t = (g.position - a).dot(b - a) / (b - a).squaredNorm();
        anchor = a + t * (b - a);
    } else {
        anchor = (g.position - a).squaredNorm() <= (g.position - b).squaredNorm() ? a : b;
    }
    const Vec3 to_center = g.position - anchor;
    const double dist = to_center.norm();
    if (dist < 1e-300) return true;
    return dist < influence_threshold(g, to_center / dist);
}

SplatModel translate_side(const SplatModel& m, const Plane& p, Side side, const Vec3& delta) {
    SplatModel out = m;
    for (Gaussian& g : out.gaussians) {
        if (side_of(signed_distance(p, g.position)) == side) g.position += delta;
    }
    return out;
}

// ---------------------------------------------------------------------------

// Metric records are built from the final, pulled-apart model against the
// unmoved cutting plane: E_e then measures exactly the material left hanging
// in the gap. With gap = 0 this reduces to evaluating the split in place.
EditOutcome plane_split_edit(const SplatModel& m, const Plane& p, double gap,
                             EditStrategy strategy, int repeat) {
    validate(p);
    if (gap < 0.0) throw ValueError("plane split: gap must be non-negative");
    EditOutcome out;
    out.model.sh_degree = m.sh_degree;

    const auto pulled_apart = [&p, gap](Gaussian g) {
        if (gap > 0.0) {
            const double d0 = signed_distance(p, g.position);
            g.position += (d0 < 0.0 ? -0.5 * gap : 0.5 * gap) * p.normal;
        }
        return g;
    };

    switch (strategy) {
    case EditStrategy::Ours: {
        std::vector<std::vector<BoundaryEntry>> expanded(m.gaussians.size());
        parallel_for(m.gaussians.size(), [&](std::size_t i) {
            expanded[i] = expand_against_plane(m.gaussians[i], p, repeat);
        });
        for (const auto& entries : expanded) {
            for (const BoundaryEntry& e : entries) {
                const Gaussian moved = pulled_apart(e.g);
                if (e.is_child) {
                    out.records.push_back(
                        {moved, e.parent, side_of(signed_distance(p, moved.position)), p});
                    ++out.report.split_count;
                } else {
                    ++out.report.passthrough_count;
                }
                out.model.gaussians.push_back(moved);
            }
        }
        break;
    }
    case EditStrategy::Move: {
        for (const Gaussian& g : m.gaussians) {
            const double d0 = signed_distance(p, g.position);
            const Gaussian moved = pulled_apart(g);
            if (std::abs(d0) < influence_threshold(g, p.normal)) {
                out.records.push_back({moved, moved, side_of(d0), p});
            }
            ++out.report.passthrough_count;
            out.model.gaussians.push_back(moved);
        }
        break;
    }
    case EditStrategy::Remove: {
        for (const Gaussian& g : m.gaussians) {
            const double d0 = signed_distance(p, g.position);
            if (std::abs(d0) < influence_threshold(g, p.normal)) {
                Gaussian ghost = g;
                ghost.opacity_mass = 0.0; // deleted: nothing left on its side
                out.records.push_back({std::move(ghost), g, side_of(d0), p});
                ++out.report.removed_count;
            } else {
                ++out.report.passthrough_count;
                out.model.gaussians.push_back(pulled_apart(g));
            }
        }
        break;
    }
    case EditStrategy::Filter:
        throw ValueError("plane split: filter strategy applies to delete edits only");
    }

    finish_report(out);
    return out;
}

EditOutcome polygon_delete_edit(const SplatModel& m, const Prism& prism, EditStrategy strategy,
                                int repeat) {
    const std::vector<Face> faces = prism_faces(prism);
    EditOutcome out;
    out.model.sh_degree = m.sh_degree;

    if (strategy == EditStrategy::Ours) {
        std::vector<BoundaryEntry> entries;
        entries.reserve(m.gaussians.size());
        for (const Gaussian& g : m.gaussians) entries.push_back({g, g, g, faces[0].plane, false});

        for (int round = 1; round <= repeat; ++round) {
            const double shrink = std::pow(3.0, round - 1);
            for (const Face& face : faces) {
                std::vector<BoundaryEntry> next;
                next.reserve(entries.size());
                for (const BoundaryEntry& e : entries) {
                    const double d0 = signed_distance(face.plane, e.g.position);
                    const double eta = influence_threshold(e.root, face.plane.normal) / shrink;
                    if (std::abs(d0) < eta && overlaps_face(e.g, face)) {
                        split_entry(next, e, face.plane);
                    } else {
                        next.push_back(e);
                    }
                }
                entries = std::move(next);
            }
        }
        for (const BoundaryEntry& e : entries) {
            if (inside_prism(faces, e.g.position)) {
                ++out.report.removed_count; // intended deletion, not an error record
                continue;
            }
            if (e.is_child) {
                out.records.push_back(make_record(e));
                ++out.report.split_count;
            } else {
                ++out.report.passthrough_count;
            }
            out.model.gaussians.push_back(e.g);
        }
    } else if (strategy == EditStrategy::Filter) {
        for (const Gaussian& g : m.gaussians) {
            if (inside_prism(faces, g.position)) {
                ++out.report.removed_count;
                continue;
            }
            // Survivors engaged at the boundary are the evaluated set.
            const Face* nearest = nullptr;
            double nearest_d0 = 0.0;
            for (const Face& face : faces) {
                const double d0 = signed_distance(face.plane, g.position);
                if (std::abs(d0) < influence_threshold(g, face.plane.normal) &&
                    overlaps_face(g, face)) {
                    if (!nearest || std::abs(d0) < std::abs(nearest_d0)) {
                        nearest = &face;
                        nearest_d0 = d0;
                    }
                }
            }
            if (nearest) {
                out.records.push_back({g, g, side_of(nearest_d0), nearest->plane});
            }
            ++out.report.passthrough_count;
            out.model.gaussians.push_back(g);
        }
    } else {
        throw ValueError("polygon delete: strategy must be ours or filter");
    }

    finish_report(out);
    return out;
}

EditOutcome curve_delete_edit(const SplatModel& m, const ImplicitSurface& surface,
                              EditStrategy strategy, int repeat) {
    EditOutcome out;
    out.model.sh_degree = m.sh_degree;

    const auto tangent_plane = [&surface](const Vec3& x) {
        const Vec3 c = surface.closest_point(x);
        const Vec3 grad = surface.gradient(c);
        const double norm = grad.norm();
        if (!(norm > 1e-300)) {
            throw ProjectionDivergedError("curve delete: vanishing gradient at surface point");
        }
        return plane_through(grad / norm, c);
    };

    if (strategy == EditStrategy::Ours) {
        std::vector<BoundaryEntry> entries;
        entries.reserve(m.gaussians.size());
        for (const Gaussian& g : m.gaussians) entries.push_back({g, g, g, Plane{}, false});

        for (int round = 1; round <= repeat; ++round) {
            const double shrink = std::pow(3.0, round - 1);
            std::vector<BoundaryEntry> next;
            next.reserve(entries.size());
            for (const BoundaryEntry& e : entries) {
                const Plane plane = tangent_plane(e.g.position);
                const double d0 = signed_distance(plane, e.g.position);
                const double eta = influence_threshold(e.root, plane.normal) / shrink;
                if (std::abs(d0) < eta) {
                    split_entry(next, e, plane);
                } else {
                    next.push_back(e);
                }
            }
            entries = std::move(next);
        }
        for (const BoundaryEntry& e : entries) {
            if (surface.value(e.g.position) < 0.0) {
                ++out.report.removed_count;
                continue;
            }
            if (e.is_child) {
                out.records.push_back(make_record(e));
                ++out.report.split_count;
            } else {
                ++out.report.passthrough_count;
            }
            out.model.gaussians.push_back(e.g);
        }
    } else if (strategy == EditStrategy::Filter) {
        for (const Gaussian& g : m.gaussians) {
            if (surface.value(g.position) < 0.0) {
                ++out.report.removed_count;
                continue;
            }
            const Plane plane = tangent_plane(g.position);
            const double d0 = signed_distance(plane, g.position);
            if (std::abs(d0) < influence_threshold(g, plane.normal)) {
                out.records.push_back({g, g, side_of(d0), plane});
            }
            ++out.report.passthrough_count;
            out.model.gaussians.push_back(g);
        }
    } else {
        throw ValueError("curve delete: strategy must be ours or filter");
    }

    finish_report(out);
    return out;
}

// ---------------------------------------------------------------------------

namespace {

Vec3 parse_vec3(const nlohmann::json& j, const char* what) {
    if (!j.is_array() || j.size() != 3) {
        throw FormatError(std::string("edit spec: ") + what + " must be a 3-element array");
    }
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Vec3 parse_unit(const nlohmann::json& j, const char* what) {
    const Vec3 v = parse_vec3(j, what);
    const double norm = v.norm();
    if (!(norm > 0.0)) throw ValueError(std::string("edit spec: ") + what + " must be non-zero");
    return v / norm;
}

EditStrategy parse_strategy(const std::string& s) {
    if (s == "ours") return EditStrategy::Ours;
    if (s == "move") return EditStrategy::Move;
    if (s == "remove") return EditStrategy::Remove;
    if (s == "filter") return EditStrategy::Filter;
    throw FormatError("edit spec: unknown strategy '" + s + "'");
}

} // namespace

EditSpec parse_edit_spec(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("edit spec: ") + e.what());
    }
    try {
        EditSpec spec;
        const std::string kind = j.at("kind").get<std::string>();
        spec.strategy = parse_strategy(j.value("strategy", std::string("ours")));
        spec.repeat = j.value("repeat", 1);
        if (spec.repeat < 1 || spec.repeat > 3) {
            throw ValueError("edit spec: repeat must be in [1,3]");
        }

        if (kind == "plane_split") {
            spec.kind = EditSpec::Kind::PlaneSplit;
            const auto& plane = j.at("plane");
            spec.plane.normal = parse_unit(plane.at("normal"), "plane normal");
            spec.plane.offset = plane.at("d").get<double>();
            spec.gap = j.value("gap", 0.0);
            if (spec.gap < 0.0) throw ValueError("edit spec: gap must be non-negative");
        } else if (kind == "polygon_delete") {
            spec.kind = EditSpec::Kind::PolygonDelete;
            const auto& prism = j.at("prism");
            const auto& verts = prism.at("vertices");
            if (!verts.is_array() || verts.size() != 3) {
                throw FormatError("edit spec: prism.vertices must hold 3 points");
            }
            for (int i = 0; i < 3; ++i) {
                spec.prism.triangle[static_cast<std::size_t>(i)] = parse_vec3(verts[i], "prism vertex");
            }
            spec.prism.axis = parse_unit(prism.at("axis"), "prism axis");
            spec.prism.extent = prism.at("extent").get<double>();
        } else if (kind == "curve_delete") {
            spec.kind = EditSpec::Kind::CurveDelete;
            const auto& surf = j.at("surface");
            const std::string surf_kind = surf.at("kind").get<std::string>();
            if (surf_kind == "sphere") {
                spec.surface = ImplicitSurface::sphere(parse_vec3(surf.at("center"), "sphere center"),
                                                       surf.at("radius").get<double>());
            } else if (surf_kind == "ellipsoid") {
                spec.surface =
                    ImplicitSurface::ellipsoid(parse_vec3(surf.at("center"), "ellipsoid center"),
                                               parse_vec3(surf.at("radii"), "ellipsoid radii"));
            } else {
                throw FormatError("edit spec: unknown surface kind '" + surf_kind + "'");
            }
        } else {
            throw FormatError("edit spec: unknown kind '" + kind + "'");
        }
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("edit spec: ") + e.what());
    }
}

EditOutcome apply_edit(const SplatModel& m, const EditSpec& spec) {
    switch (spec.kind) {
    case EditSpec::Kind::PlaneSplit:
        return plane_split_edit(m, spec.plane, spec.gap, spec.strategy, spec.repeat);
    case EditSpec::Kind::PolygonDelete:
        return polygon_delete_edit(m, spec.prism, spec.strategy, spec.repeat);
    case EditSpec::Kind::CurveDelete:
        return curve_delete_edit(m, spec.surface, spec.strategy, spec.repeat);
    }
    throw ValueError("edit spec: invalid kind");
}

} // namespace gsplit
