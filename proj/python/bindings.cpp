#include "gsplit/core.hpp"
#include "gsplit/densify.hpp"
#include "gsplit/edit.hpp"
#include "gsplit/errors.hpp"
#include "gsplit/metrics.hpp"
#include "gsplit/ply_io.hpp"
#include "gsplit/split.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

namespace py = pybind11;
using namespace gsplit;

namespace {

Eigen::Vector4d quat_to_vec(const Quat& q) { return {q.w(), q.x(), q.y(), q.z()}; }

py::dict report_to_dict(const EditReport& r) {
    py::dict d;
    d["e_i"] = r.e_i;
    d["e_e"] = r.e_e;
    d["W"] = r.split_count;
    d["removed"] = r.removed_count;
    d["passthrough"] = r.passthrough_count;
    return d;
}

py::dict density_report_to_dict(const InhomogeneityReport& r) {
    py::dict d;
    d["gamma_max"] = r.gamma_max;
    d["histogram"] = r.histogram;
    d["histogram_edges"] = InhomogeneityReport::kHistogramEdges;
    d["split_rounds"] = r.split_rounds;
    d["final_count"] = r.final_count;
    d["rounds_exhausted"] = r.rounds_exhausted;
    return d;
}

} // namespace

PYBIND11_MODULE(_gsplit, m) {
    m.doc() = "Moment-conserving splitting, editing and densification of 3D Gaussian splat models";

    const py::object base = py::register_exception<Error>(m, "GsplitError");
    py::register_exception<FormatError>(m, "FormatError", base);
    py::register_exception<ValueError>(m, "InvalidValueError", base);
    py::register_exception<IoError>(m, "IoError", base);
    py::register_exception<NonSymmetricError>(m, "NonSymmetricError", base);
    py::register_exception<SingularCovarianceError>(m, "SingularCovarianceError", base);
    py::register_exception<DegenerateChildError>(m, "DegenerateChildError", base);
    py::register_exception<ZeroMassError>(m, "ZeroMassError", base);
    py::register_exception<EmptyInputError>(m, "EmptyInputError", base);
    py::register_exception<DegeneratePrismError>(m, "DegeneratePrismError", base);
    py::register_exception<ProjectionDivergedError>(m, "ProjectionDivergedError", base);

    py::class_<Gaussian>(m, "Gaussian")
        .def(py::init<>())
        .def_readwrite("position", &Gaussian::position)
        .def_property(
            "rotation", [](const Gaussian& g) { return quat_to_vec(g.rotation); },
            [](Gaussian& g, const Eigen::Vector4d& q) {
                g.rotation = Quat(q[0], q[1], q[2], q[3]).normalized();
            },
            "Unit quaternion as (w, x, y, z); assignment normalizes")
        .def_readwrite("scales", &Gaussian::scales)
        .def_readwrite("opacity_mass", &Gaussian::opacity_mass)
        .def_readwrite("sh_coeffs", &Gaussian::sh_coeffs)
        .def("covariance", &gsplit::covariance)
        .def("pdf_at", &gsplit::pdf_at, py::arg("x"))
        .def("__repr__", [](const Gaussian& g) {
            return "<Gaussian mass " + std::to_string(g.opacity_mass) + ">";
        });

    py::class_<SplatModel>(m, "SplatModel")
        .def(py::init<>())
        .def_readwrite("gaussians", &SplatModel::gaussians)
        .def_readwrite("sh_degree", &SplatModel::sh_degree)
        .def("__len__", &SplatModel::size);

    py::class_<Plane>(m, "Plane")
        .def(py::init([](const Vec3& normal, double offset) {
                 const double norm = normal.norm();
                 if (!(norm > 0.0)) throw ValueError("plane normal must be non-zero");
                 return Plane{normal / norm, offset};
             }),
             py::arg("normal"), py::arg("offset"))
        .def_readonly("normal", &Plane::normal)
        .def_readonly("offset", &Plane::offset)
        .def("signed_distance", &gsplit::signed_distance, py::arg("x"));

    m.def("influence_threshold", &gsplit::influence_threshold, py::arg("gaussian"), py::arg("direction"));

    // Splitting and merging.
    m.def(
        "split_at_plane",
        [](const Gaussian& g, const Plane& p) -> std::optional<std::pair<Gaussian, Gaussian>> {
            const SplitOutcome out = split_at_plane(g, p);
            if (!out.did_split()) return std::nullopt;
            return std::make_pair(out.left, out.right);
        },
        py::arg("gaussian"), py::arg("plane"),
        "(left, right) children, or None when the plane is outside the influence range");
    m.def("split_centered", &gsplit::split_centered, py::arg("gaussian"), py::arg("direction"));
    m.def("merge", &gsplit::merge, py::arg("left"), py::arg("right"));
    m.def(
        "halfspace_moments",
        [](const Gaussian& g, const Plane& p, bool negative_side) {
            const HalfspaceMoments h =
                halfspace_moments(g, p, negative_side ? Side::Negative : Side::Positive);
            return py::make_tuple(h.mass, h.first, h.second);
        },
        py::arg("gaussian"), py::arg("plane"), py::arg("negative_side") = true,
        "Raw truncated moments (mass, first, second) of alpha * pdf over a half-space");
    m.def(
        "mc_halfspace_mass",
        [](const Gaussian& g, const Plane& p, std::size_t samples, std::uint64_t seed) {
            const McEstimate e = mc_halfspace_mass(g, p, samples, seed);
            return py::make_tuple(e.estimate, e.std_error);
        },
        py::arg("gaussian"), py::arg("plane"), py::arg("samples") = 1000000, py::arg("seed") = 42);

    // Model I/O.
    m.def("load_model", [](const std::string& path) { return load_model(path); }, py::arg("path"));
    m.def(
        "save_model",
        [](const SplatModel& model, const std::string& path) {
            return save_model(model, path).clamped_opacities;
        },
        py::arg("model"), py::arg("path"), "Returns the number of clamped peak opacities");
    m.def(
        "export_points",
        [](const SplatModel& model, const std::string& path) { export_points(model, path); },
        py::arg("model"), py::arg("path"));

    // Editing.
    m.def(
        "apply_edit",
        [](const SplatModel& model, const std::string& spec_json) {
            const EditOutcome out = apply_edit(model, parse_edit_spec(spec_json));
            return py::make_tuple(out.model, report_to_dict(out.report));
        },
        py::arg("model"), py::arg("spec_json"),
        "Apply an EditSpec JSON document; returns (model, report)");
    m.def(
        "translate_side",
        [](const SplatModel& model, const Plane& p, bool negative_side, const Vec3& delta) {
            return translate_side(model, p, negative_side ? Side::Negative : Side::Positive, delta);
        },
        py::arg("model"), py::arg("plane"), py::arg("negative_side"), py::arg("delta"));

    // Densification.
    m.def("gamma", &gsplit::gamma, py::arg("gaussian"),
          "Largest over second-largest principal scale");
    m.def(
        "gamma_ij",
        [](const Gaussian& g, double r_m) {
            const GammaPairs p = gamma_ij(g, r_m);
            return py::make_tuple(p.values, p.split_component);
        },
        py::arg("gaussian"), py::arg("r_m"));
    m.def(
        "homogenize",
        [](const SplatModel& model, double eta_gamma, int max_rounds) {
            auto [out, report] = homogenize(model, eta_gamma, max_rounds);
            return py::make_tuple(std::move(out), density_report_to_dict(report));
        },
        py::arg("model"), py::arg("eta_gamma") = 5.0, py::arg("max_rounds") = 8);
    m.def(
        "densify_for_points",
        [](const SplatModel& model, double eta_gamma, int max_rounds) {
            auto [out, report] = densify_for_points(model, eta_gamma, max_rounds);
            return py::make_tuple(std::move(out), density_report_to_dict(report));
        },
        py::arg("model"), py::arg("eta_gamma") = 2.0, py::arg("max_rounds") = 8);
}
