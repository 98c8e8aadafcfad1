// Python bindings. Structured values cross the boundary as JSON text produced
// by the library's own serialisers; images are float32 numpy arrays.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "jolimas/cli.hpp"
#include "jolimas/eval.hpp"

namespace py = pybind11;
using namespace jolimas;

namespace {

using Array = py::array_t<float, py::array::c_style | py::array::forcecast>;

Array to_array(const Image& img) {
  Array out({img.height, img.width});
  std::copy(img.data.begin(), img.data.end(), out.mutable_data());
  return out;
}

Image from_array(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("image must be a 2-D array");
  Image img(int(a.shape(1)), int(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), img.data.begin());
  return img;
}

Scene parse_scene(const std::string& text, const std::string& base_dir) {
  return scene_from_json(Json::parse(text), base_dir, "scene");
}

const CameraView& find_view(const Scene& scene, const std::string& id) {
  for (const auto& v : scene.views)
    if (v.id == id) return v;
  throw Error(ErrorCode::InvalidArgument, "view '" + id + "' is not in the scene");
}

Ellipse ellipse_from(const py::sequence& s) {
  if (py::len(s) != 5) throw py::value_error("ellipse is (cx, cy, a, b, theta)");
  return Ellipse{Vec2(s[0].cast<double>(), s[1].cast<double>()), s[2].cast<double>(), s[3].cast<double>(),
                 s[4].cast<double>()};
}

DetectConfig detect_config(const std::string& text) {
  return text.empty() ? DetectConfig{} : detect_config_from_json(Json::parse(text), "detect");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Specularity reconstruction and prediction on curved surfaces";

  py::register_exception<Error>(m, "JolimasError", PyExc_RuntimeError);

  m.def(
      "dispatch",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "jolimas");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        return jolimas::dispatch(int(argv.size()), argv.data());
      },
      py::arg("args"), "Run the command-line interface; returns the exit code.");

  m.def(
      "render",
      [](const std::string& scene_json, const std::string& view_id, const std::string& base_dir) {
        const Scene scene = parse_scene(scene_json, base_dir);
        return to_array(render(scene, find_view(scene, view_id)));
      },
      py::arg("scene_json"), py::arg("view_id"), py::arg("base_dir") = ".");

  m.def(
      "detect",
      [](const Array& image, const std::string& view_id, const std::string& detect_json) {
        return to_json(detect_specularity(from_array(image), view_id, detect_config(detect_json))).dump();
      },
      py::arg("image"), py::arg("view_id") = "view", py::arg("detect_json") = "");

  m.def(
      "reconstruct",
      [](const std::string& scene_json, const std::map<std::string, Array>& images, const std::string& mode,
         const std::string& base_dir) {
        const Scene scene = parse_scene(scene_json, base_dir);
        const DetectConfig detect;
        std::vector<ViewObservation> inputs;
        for (const auto& [id, img] : images) {
          const CameraView& v = find_view(scene, id);
          inputs.push_back({v, observe(v, scene.surface, from_array(img), detect)});
        }
        PipelineConfig cfg;
        cfg.mode = parse_mode(mode);
        return model_to_string(reconstruct_from_observations(scene.surface, inputs, cfg));
      },
      py::arg("scene_json"), py::arg("images"), py::arg("mode") = "canonical", py::arg("base_dir") = ".",
      "Reconstruct from {view_id: image}; returns the model JSON text.");

  m.def(
      "predict",
      [](const std::string& model_json, const std::string& scene_json, const std::string& view_id,
         const std::string& mode, const std::string& base_dir) {
        const Scene scene = parse_scene(scene_json, base_dir);
        PipelineConfig cfg;
        cfg.mode = parse_mode(mode);
        return to_json(predict_mode(model_from_string(model_json), find_view(scene, view_id), scene.surface, cfg))
            .dump();
      },
      py::arg("model_json"), py::arg("scene_json"), py::arg("view_id"), py::arg("mode") = "canonical",
      py::arg("base_dir") = ".");

  m.def(
      "ellipse_error",
      [](const py::sequence& predicted, const py::sequence& detected, int width, int height, int rays) {
        return ellipse_error(ellipse_from(predicted), ellipse_from(detected), width, height, rays).percent;
      },
      py::arg("predicted"), py::arg("detected"), py::arg("width"), py::arg("height"), py::arg("rays") = 36,
      "Percent error between two (cx, cy, a, b, theta) ellipses.");

  m.def("spearman", &spearman, py::arg("x"), py::arg("y"));
  m.def("metric_definition", &metric_definition);
}
