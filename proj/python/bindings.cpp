#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "coursemi/config.hpp"
#include "coursemi/error.hpp"
#include "coursemi/eval.hpp"
#include "coursemi/metapath.hpp"
#include "coursemi/synth.hpp"
#include "coursemi/trainer.hpp"
#include "coursemi/version.hpp"

namespace py = pybind11;
using namespace coursemi;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_numpy(const Tensor& t) {
  Array a({t.rows(), t.cols()});
  std::copy(t.data().begin(), t.data().end(), a.mutable_data());
  return a;
}

Tensor from_numpy(const Array& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-D array");
  const auto r = static_cast<std::size_t>(a.shape(0));
  const auto c = static_cast<std::size_t>(a.shape(1));
  return Tensor(r, c, std::vector<double>(a.data(), a.data() + r * c));
}

CourseLabels labels_from(const std::map<std::size_t, int>& m) { return {m}; }

std::vector<MetaPath> metapaths_from(const std::vector<std::string>& names) {
  std::vector<MetaPath> out;
  for (const auto& n : names) out.push_back(MetaPath::parse(n));
  return out;
}

py::dict train_py(const HinGraph& g, const Array& x, const std::vector<std::string>& mps,
                  const RunConfig& cfg) {
  TrainConfig t = cfg.train;
  const Tensor features = from_numpy(x);
  t.feature_dim = features.cols();
  TrainResult r = [&] {
    py::gil_scoped_release nogil;
    return train(g, features, metapaths_from(mps), t, cfg.projection);
  }();
  py::dict out;
  out["unified"] = to_numpy(r.embeddings.unified);
  py::dict views;
  for (std::size_t v = 0; v < r.embeddings.views.size(); ++v) {
    views[py::str(r.embeddings.view_labels[v])] = to_numpy(r.embeddings.views[v]);
  }
  out["views"] = views;
  out["alpha"] = r.embeddings.alpha;
  std::vector<std::vector<double>> log;
  for (const auto& e : r.report.epochs) {
    log.push_back({e.losses.q, e.losses.j, e.losses.s, e.losses.y, e.losses.total});
  }
  out["losses"] = log;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-view course embeddings on typed course networks";
  m.attr("__version__") = kVersion;

  static py::exception<Error> base(m, "CoursemiError");
  static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  static py::exception<NumericFault> numeric_fault(m, "NumericFault", PyExc_FloatingPointError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const NumericFault& e) {
      py::set_error(numeric_fault, e.what());
    } catch (const IoError& e) {
      PyErr_SetString(PyExc_OSError, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  py::class_<HinGraph>(m, "HinGraph")
      .def_property_readonly("num_nodes", &HinGraph::num_nodes)
      .def_property_readonly("num_edges", &HinGraph::num_edges)
      .def_property_readonly("num_courses", &HinGraph::num_courses)
      .def("count", [](const HinGraph& g, const std::string& type) {
        const auto t = parse_node_type(type);
        if (!t) throw ConfigError("unknown node type '" + type + "'");
        return g.count(*t);
      })
      .def("course_ids", [](const HinGraph& g) {
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < g.num_courses(); ++i) ids.push_back(g.node(g.course_id(i)).external_id);
        return ids;
      });

  m.def("load_hin", &load_hin, py::arg("nodes_path"), py::arg("edges_path"));
  m.def("load_features", [](const std::string& path, const HinGraph& g) { return to_numpy(load_features(path, g)); });
  m.def("load_labels", [](const std::string& path, const HinGraph& g) { return load_labels(path, g).classes; });

  py::class_<RunConfig>(m, "Config")
      .def(py::init<>())
      .def("set", [](RunConfig& c, const std::string& k, const std::string& v) { c.set(k, v); })
      .def("echo", &RunConfig::echo)
      .def_static("load", &load_config);

  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("n_courses", &SynthConfig::n_courses)
      .def_readwrite("n_students", &SynthConfig::n_students)
      .def_readwrite("n_teachers", &SynthConfig::n_teachers)
      .def_readwrite("n_subjects", &SynthConfig::n_subjects)
      .def_readwrite("n_classes", &SynthConfig::n_classes)
      .def_readwrite("d", &SynthConfig::d)
      .def_readwrite("p_in", &SynthConfig::p_in)
      .def_readwrite("p_out", &SynthConfig::p_out)
      .def_readwrite("sigma_f", &SynthConfig::sigma_f)
      .def_readwrite("feature_signal", &SynthConfig::feature_signal)
      .def_readwrite("seed", &SynthConfig::seed)
      .def_readwrite("noise_students", &SynthConfig::noise_students)
      .def_readwrite("noise_teachers", &SynthConfig::noise_teachers)
      .def_readwrite("noise_subjects", &SynthConfig::noise_subjects);

  m.def("generate", [](const SynthConfig& c) {
    SynthData d = generate(c);
    py::dict out;
    out["features"] = to_numpy(d.features);
    out["labels"] = d.labels.classes;
    out["graph"] = std::move(d.graph);
    return out;
  });
  m.def("write_synth", [](const SynthConfig& c, const std::string& dir) { write_synth(generate(c), c, dir); });

  m.def("project", [](const HinGraph& g, const std::string& mp, bool weighted) {
    return to_numpy(project(g, MetaPath::parse(mp), {weighted}));
  }, py::arg("graph"), py::arg("metapath"), py::arg("weighted") = false);
  m.def("normalize", [](const Array& a) { return to_numpy(normalize(from_numpy(a))); });

  m.def("train", &train_py, py::arg("graph"), py::arg("features"),
        py::arg("metapaths") = std::vector<std::string>{"MP1", "MP2", "MP3"},
        py::arg("config") = RunConfig{});

  m.def("evaluate", [](const Array& h, const std::map<std::size_t, int>& labels, const RunConfig& cfg) {
    const auto row = evaluate_embedding(from_numpy(h), labels_from(labels), cfg.eval);
    return py::make_tuple(row.accuracy, row.macro_f1);
  }, py::arg("embedding"), py::arg("labels"), py::arg("config") = RunConfig{});
  m.def("accuracy", [](const std::vector<int>& y, const std::vector<int>& yhat) { return accuracy(y, yhat); });
  m.def("macro_f1", [](const std::vector<int>& y, const std::vector<int>& yhat, int num_classes) {
    return macro_f1(y, yhat, num_classes);
  });
}
