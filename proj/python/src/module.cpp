// Python bindings. Structured values cross the boundary as JSON documents;
// the package wrapper turns them into dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tunegrid/app/simulate.hpp"
#include "tunegrid/error.hpp"
#include "tunegrid/gen/generator.hpp"
#include "tunegrid/histo/fit.hpp"
#include "tunegrid/histo/json.hpp"
#include "tunegrid/tune/interpolation_cache.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace tunegrid;

namespace {

gen::GeneratorModel model_of(const std::string& doc) {
  return doc.empty() ? gen::GeneratorModel::default_model() : json::parse(doc).get<gen::GeneratorModel>();
}

tune::TuneParameters params_of(const std::vector<double>& values) { return {values}; }

class PyCache {
 public:
  PyCache(const std::string& space, std::size_t max_samples)
      : cache_(json::parse(space).get<tune::ParamSpace>(), max_samples) {}

  void add_sample(const std::vector<double>& params, const std::string& result) {
    cache_.add_sample(params_of(params), json::parse(result).get<histo::HistogramSet>());
  }

  std::pair<std::string, double> estimate(const std::vector<double>& params) const {
    auto e = cache_.estimate(params_of(params));
    return {json(e.histograms).dump(), e.quality};
  }

  std::size_t size() const { return cache_.size(); }

 private:
  tune::InterpolationCache cache_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "tunegrid native core";

  // Messages carry the error code name first, e.g. "out_of_space: ...".
  static PyObject* error_type = py::exception<Error>(m, "Error", PyExc_ValueError).release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error_type, (std::string(error_code_name(e.code())) + ": " + e.what()).c_str());
    } catch (const json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("default_model", [] { return json(gen::GeneratorModel::default_model()).dump(); });

  m.def(
      "generate_chunk",
      [](const std::vector<double>& params, std::uint64_t n_events, std::uint64_t seed, const std::string& model) {
        py::gil_scoped_release release;
        return json(gen::generate_chunk(model_of(model), params_of(params), n_events, gen::Seed{seed})).dump();
      },
      py::arg("params"), py::arg("n_events"), py::arg("seed"), py::arg("model") = "");

  m.def(
      "expected_reference",
      [](const std::vector<double>& params, const std::string& model) {
        json out = json::object();
        for (const auto& [id, ref] : gen::expected_reference(model_of(model), params_of(params))) out[id] = ref;
        return out.dump();
      },
      py::arg("params"), py::arg("model") = "");

  m.def("merge", [](const std::vector<std::string>& partials) {
    std::vector<histo::HistogramSet> sets;
    for (const auto& p : partials) sets.push_back(json::parse(p).get<histo::HistogramSet>());
    return json(histo::merge(sets)).dump();
  });

  m.def("fit_score", [](const std::string& observed, const std::string& reference) {
    const auto doc = json::parse(reference);
    histo::ReferenceSet refs;
    for (const auto& [id, r] : doc.items()) refs[id] = r.get<histo::ReferenceHistogram>();
    return json(histo::fit_score_set(json::parse(observed).get<histo::HistogramSet>(), refs)).dump();
  });

  py::class_<PyCache>(m, "InterpolationCache")
      .def(py::init<const std::string&, std::size_t>(), py::arg("space"),
           py::arg("max_samples") = tune::InterpolationCache::kDefaultMaxSamples)
      .def("add_sample", &PyCache::add_sample)
      .def("estimate", &PyCache::estimate)
      .def("__len__", &PyCache::size);

  m.def(
      "simulate",
      [](std::size_t workers, std::size_t budget, std::uint64_t seed, std::uint64_t target_events,
         std::uint64_t chunk_events, double churn, double speed_spread) {
        app::SimulateOptions o;
        o.workers = workers;
        o.budget = budget;
        o.seed = seed;
        o.jobs.target_events = target_events;
        o.jobs.chunk_events = chunk_events;
        o.churn = churn;
        o.speed_spread = speed_spread;
        py::gil_scoped_release release;
        return app::to_json(app::simulate(o)).dump();
      },
      py::arg("workers") = 8, py::arg("budget") = 30, py::arg("seed") = 1, py::arg("target_events") = 20000,
      py::arg("chunk_events") = 2000, py::arg("churn") = 0.0, py::arg("speed_spread") = 0.0);
}
