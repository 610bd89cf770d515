#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "salref/adam.hpp"
#include "salref/bound.hpp"
#include "salref/checkpoint.hpp"
#include "salref/config.hpp"
#include "salref/datagen.hpp"
#include "salref/loss.hpp"
#include "salref/metrics.hpp"
#include "salref/pipeline.hpp"
#include "salref/report.hpp"
#include "salref/stats.hpp"

namespace py = pybind11;
using namespace salref;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

Grid grid_from_array(const FloatArray& arr) {
  std::vector<int> shape(static_cast<std::size_t>(arr.ndim()));
  for (py::ssize_t d = 0; d < arr.ndim(); ++d)
    shape[static_cast<std::size_t>(d)] = static_cast<int>(arr.shape(d));
  std::vector<float> data(arr.data(), arr.data() + arr.size());
  return Grid(std::move(shape), std::move(data));
}

py::array_t<float> array_from_grid(const Grid& g) {
  std::vector<py::ssize_t> shape(g.shape().begin(), g.shape().end());
  py::array_t<float> out(shape);
  std::copy(g.values().begin(), g.values().end(), out.mutable_data());
  return out;
}

FixationMap fixations_from_array(const py::array_t<uint8_t, py::array::c_style>& arr) {
  if (arr.ndim() != 2) throw std::invalid_argument("fixation map must be 2-d");
  FixationMap fix(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
  std::copy(arr.data(), arr.data() + arr.size(), fix.values.begin());
  return fix;
}

}  // namespace

PYBIND11_MODULE(salref, m) {
  m.doc() = "few-reference saliency transfer core";

  py::class_<ModelState>(m, "Model")
      .def_static(
          "init",
          [](int channels, int hidden, int head_layers, uint64_t seed) {
            Rng rng(seed, "init");
            return make_model(default_architecture(channels, hidden), head_layers, rng);
          },
          py::arg("channels"), py::arg("hidden") = 16, py::arg("head_layers") = 1,
          py::arg("seed") = 1)
      .def_static("load", &load_checkpoint, py::arg("path"))
      .def("save", [](const ModelState& mdl, const std::string& path) { save_checkpoint(path, mdl); },
           py::arg("path"))
      .def("forward",
           [](const ModelState& mdl, const FloatArray& x) {
             return array_from_grid(forward(mdl, grid_from_array(x)));
           },
           py::arg("features"))
      .def_property_readonly("param_count", &ModelState::param_count)
      .def_property_readonly("head_param_count", &ModelState::head_param_count)
      .def("params", [](const ModelState& mdl) { return mdl.flatten_params(); });

  m.def("nss",
        [](const FloatArray& pred, const py::array_t<uint8_t, py::array::c_style>& fix) {
          return nss(grid_from_array(pred), fixations_from_array(fix));
        },
        py::arg("pred"), py::arg("fixations"));
  m.def("auc_judd",
        [](const FloatArray& pred, const py::array_t<uint8_t, py::array::c_style>& fix) {
          return auc_judd(grid_from_array(pred), fixations_from_array(fix));
        },
        py::arg("pred"), py::arg("fixations"));
  m.def("cc",
        [](const FloatArray& pred, const FloatArray& gt) {
          return cc(grid_from_array(pred), grid_from_array(gt));
        },
        py::arg("pred"), py::arg("gt"));

  m.def("normalized_l1",
        [](const FloatArray& pred, const FloatArray& target) {
          LossResult r = normalized_l1(grid_from_array(pred), grid_from_array(target));
          return py::make_tuple(r.loss, array_from_grid(r.grad));
        },
        py::arg("pred"), py::arg("target"));

  m.def("cosine", &cosine, py::arg("a"), py::arg("b"));
  m.def("correct_gradient",
        [](const GradientVector& g_src, const GradientVector& g_ref, double epsilon,
           double lambda, int inner_steps, double inner_step_size, int backtracking_halvings) {
          CorrectionConfig cfg{epsilon, lambda, inner_steps, inner_step_size,
                               backtracking_halvings};
          CorrectionOutcome oc = correct_gradient(g_src, g_ref, cfg);
          py::dict out;
          out["corrected"] = oc.corrected;
          out["gate_triggered"] = oc.gate_triggered;
          out["cos_before"] = oc.cos_before;
          out["cos_after"] = oc.cos_after;
          out["inner_steps_taken"] = oc.inner_steps_taken;
          return out;
        },
        py::arg("g_source"), py::arg("g_ref"), py::arg("epsilon") = 0.0,
        py::arg("lambda_") = 1e-3, py::arg("inner_steps") = 5, py::arg("inner_step_size") = 0.1,
        py::arg("backtracking_halvings") = 20);

  m.def("bound",
        [](uint64_t m_dim, double p, uint64_t hypotheses, double delta, uint64_t dataset_size) {
          return generalization_bound({m_dim, p, hypotheses, delta, dataset_size});
        },
        py::arg("m"), py::arg("p"), py::arg("hypotheses"), py::arg("delta"),
        py::arg("dataset_size"));
  m.def("lr_schedule", &lr_schedule, py::arg("base_lr"), py::arg("epoch"));

  m.def("format_mean_std", &format_mean_std, py::arg("mean"), py::arg("std"));
  m.def("paired_t_test", &paired_t_test, py::arg("a"), py::arg("b"));
  m.def("permutation_test",
        [](const std::vector<double>& a, const std::vector<double>& b, int iterations,
           uint64_t seed) {
          Rng rng(seed, "perm_test");
          return permutation_test(a, b, iterations, rng);
        },
        py::arg("a"), py::arg("b"), py::arg("iterations") = 10000, py::arg("seed") = 1);

  m.def("gen_dataset",
        [](const std::string& path, const std::string& kind, int count, uint64_t seed) {
          DomainSpec spec;
          if (kind == "natural_like") spec.kind = DomainKind::natural_like;
          else if (kind == "webpage_like") {
            spec.kind = DomainKind::webpage_like;
            spec.mixing_seed = 2;
          } else throw std::invalid_argument("kind must be natural_like or webpage_like");
          save_dataset(path, generate_dataset(spec, count, seed, DomainTag::target));
        },
        py::arg("path"), py::arg("kind"), py::arg("count"), py::arg("seed") = 1);

  m.def("load_dataset",
        [](const std::string& path) {
          const Dataset d = load_dataset(path, DomainTag::source);
          py::list out;
          for (const auto& s : d.samples) {
            py::dict item;
            item["features"] = array_from_grid(s.features);
            item["gt"] = array_from_grid(s.gt_saliency);
            py::array_t<uint8_t> fix({s.fixations.height, s.fixations.width});
            std::copy(s.fixations.values.begin(), s.fixations.values.end(), fix.mutable_data());
            item["fixations"] = fix;
            out.append(item);
          }
          return out;
        },
        py::arg("path"));

  m.def("experiment_csv",
        [](const std::string& config_text) {
          return records_to_csv(run_experiment(parse_config(config_text), false));
        },
        py::arg("config_text"));
}
