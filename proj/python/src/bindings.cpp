#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <optional>
#include <string>

#include "agmn/bp.hpp"
#include "agmn/error.hpp"
#include "agmn/hand_graph.hpp"
#include "agmn/potentials.hpp"
#include "agmn/tensor_io.hpp"

namespace py = pybind11;
using namespace agmn;

namespace {

// Copies a (C, H, W) float32 or float64 array into a TensorStack.
TensorStack to_stack(const py::array& a, const char* what) {
    if (a.ndim() != 3) {
        throw Error(Errc::shape_mismatch,
                    std::string(what) + " must have shape (channels, rows, cols), got " + std::to_string(a.ndim()) +
                        " dimensions");
    }
    const auto c = static_cast<int>(a.shape(0));
    const auto r = static_cast<int>(a.shape(1));
    const auto w = static_cast<int>(a.shape(2));
    std::vector<double> data(static_cast<std::size_t>(a.size()));
    if (py::isinstance<py::array_t<float>>(a)) {
        auto f = py::array_t<float, py::array::c_style | py::array::forcecast>::ensure(a);
        std::copy(f.data(), f.data() + f.size(), data.begin());
    } else if (py::isinstance<py::array_t<double>>(a)) {
        auto d = py::array_t<double, py::array::c_style | py::array::forcecast>::ensure(a);
        std::copy(d.data(), d.data() + d.size(), data.begin());
    } else {
        throw Error(Errc::invalid_argument, std::string(what) + " must be float32 or float64");
    }
    return TensorStack(c, r, w, std::move(data));
}

py::array_t<double> to_array(const TensorStack& t) {
    py::array_t<double> out({t.channels(), t.rows(), t.cols()});
    std::copy(t.values().begin(), t.values().end(), out.mutable_data());
    return out;
}

TreeGraph graph_or_default(const std::optional<std::string>& graph_json) {
    return graph_json ? graph_from_json(*graph_json) : default_hand_tree();
}

py::tuple infer_arrays(const py::array& unary, const py::array& kernels, const std::optional<std::string>& graph_json,
                       bool shared_kernels, const std::string& conv, bool unary_only) {
    if (conv != "direct" && conv != "fft") throw Error(Errc::invalid_argument, "conv must be 'direct' or 'fft'");
    const TensorStack u = to_stack(unary, "unary");
    BeliefResult r;
    if (unary_only) {
        r = infer_unary_only(u);
    } else {
        const TensorStack k = to_stack(kernels, "kernels");
        InferOptions opt;
        opt.shared_kernels = shared_kernels;
        opt.conv = conv == "fft" ? ConvPath::fft : ConvPath::direct;
        py::gil_scoped_release release;
        r = infer(u, k, graph_or_default(graph_json), opt);
    }
    py::list preds;
    for (const auto& p : r.predictions) preds.append(py::make_tuple(p.row, p.col));
    return py::make_tuple(to_array(r.marginals), preds);
}

py::tuple make_targets_arrays(const std::vector<std::pair<double, double>>& keypoints, int rows, int cols, int ksize,
                              double sigma, const std::optional<std::string>& graph_json) {
    KeypointSet kp;
    for (auto [x, y] : keypoints) kp.points.push_back({x, y});
    const Schedule s = build_schedule(graph_or_default(graph_json));
    return py::make_tuple(to_array(make_unary_targets(kp, rows, cols, sigma)),
                          to_array(make_kernel_targets(kp, s, ksize, sigma)));
}

}  // namespace

PYBIND11_MODULE(_agmn, m) {
    m.doc() = "Tree-structured belief propagation over 2D score maps";
    m.attr("__version__") = AGMN_VERSION;

    py::register_exception<Error>(m, "AgmnError", PyExc_ValueError);

    m.def("infer_arrays", &infer_arrays, py::arg("unary"), py::arg("kernels"), py::arg("graph_json") = py::none(),
          py::arg("shared_kernels") = false, py::arg("conv") = "direct", py::arg("unary_only") = false,
          "Marginals (float64, n x H x W) and (row, col) predictions from raw unary maps and kernels.");
    m.def("make_targets_arrays", &make_targets_arrays, py::arg("keypoints"), py::arg("rows") = 46,
          py::arg("cols") = 46, py::arg("ksize") = 45, py::arg("sigma") = 1.0, py::arg("graph_json") = py::none(),
          "Gaussian score map targets and kernel targets for (x, y) keypoints.");
    m.def(
        "read_tensor", [](const std::string& path) { return to_array(read_tensor(path)); }, py::arg("path"));
    m.def(
        "write_tensor",
        [](const py::array& a, const std::string& path, const std::string& dtype) {
            if (dtype != "f32" && dtype != "f64") throw Error(Errc::invalid_argument, "dtype must be 'f32' or 'f64'");
            write_tensor(to_stack(a, "array"), path, dtype == "f32" ? DType::f32 : DType::f64);
        },
        py::arg("array"), py::arg("path"), py::arg("dtype") = "f64");
    m.def("default_graph_json", [] { return graph_to_json(default_hand_tree()); });
}
