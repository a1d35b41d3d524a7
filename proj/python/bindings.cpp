#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "reco/config.hpp"
#include "reco/curation.hpp"
#include "reco/dedup.hpp"
#include "reco/error.hpp"
#include "reco/evaluation.hpp"
#include "reco/losses.hpp"
#include "reco/probe.hpp"
#include "reco/sampler.hpp"
#include "reco/similarity.hpp"
#include "reco/synth.hpp"
#include "reco/trainer.hpp"

namespace py = pybind11;
using namespace reco;

namespace {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

NegativeMask to_mask(const BoolMatrix& m) {
  if (m.rows() != m.cols()) fail_data("mask must be square");
  NegativeMask out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k)
      if (i != k) out.set(i, k, m(i, k));
  return out;
}

BoolMatrix from_mask(const NegativeMask& m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  BoolMatrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) out(i, k) = m.selected(i, k);
  return out;
}

EmbeddingBatch batch_of(Matrix z, const std::vector<int>& sample_labels) {
  return EmbeddingBatch::from_view_pairs(std::move(z), sample_labels);
}

template <typename E>
E enum_from(py::handle h, E (*parse)(std::string_view)) {
  if (py::isinstance<py::str>(h)) return parse(h.cast<std::string>());
  return h.cast<E>();
}

std::vector<std::size_t> leaf_indices(const Taxonomy& t) { return t.leaves(); }

Image image_from_array(py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> a) {
  Image img;
  if (a.ndim() == 2) {
    img.channels = 1;
  } else if (a.ndim() == 3 && (a.shape(2) == 1 || a.shape(2) == 3)) {
    img.channels = static_cast<int>(a.shape(2));
  } else {
    fail_data("image must be HxW or HxWx{1,3} uint8");
  }
  img.height = static_cast<int>(a.shape(0));
  img.width = static_cast<int>(a.shape(1));
  img.pixels.assign(a.data(), a.data() + a.size());
  return img;
}

}  // namespace

PYBIND11_MODULE(_reco, m) {
  m.doc() = "Taxonomy-aware contrastive learning core";

  auto base = py::register_exception<Error>(m, "RecoError", PyExc_RuntimeError);
  static py::exception<Error> config_error(m, "ConfigError", base.ptr());
  static py::exception<Error> data_error(m, "DataError", base.ptr());
  static py::exception<Error> numeric_error(m, "NumericDivergence", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      switch (e.kind()) {
        case ErrorKind::config: PyErr_SetString(config_error.ptr(), e.what()); break;
        case ErrorKind::data: PyErr_SetString(data_error.ptr(), e.what()); break;
        case ErrorKind::numeric: PyErr_SetString(numeric_error.ptr(), e.what()); break;
      }
    }
  });

  py::enum_<Normalization>(m, "Normalization")
      .value("self_ratio", Normalization::self_ratio)
      .value("min_max", Normalization::min_max);
  py::enum_<Objective>(m, "Objective")
      .value("info_nce", Objective::info_nce)
      .value("supcon", Objective::supcon)
      .value("paco", Objective::paco)
      .value("reco_supcon", Objective::reco_supcon)
      .value("reco_paco", Objective::reco_paco);
  py::enum_<Split>(m, "Split").value("train", Split::train).value("test", Split::test);

  py::class_<ConceptNode>(m, "ConceptNode")
      .def(py::init([](std::string id, std::string name, bool is_class, long long image_count, bool offensive,
                       bool non_visual) {
             return ConceptNode{std::move(id), std::move(name), is_class, image_count, offensive, non_visual};
           }),
           py::arg("id"), py::arg("name") = "", py::arg("is_class") = false, py::arg("image_count") = 0,
           py::arg("offensive") = false, py::arg("non_visual") = false)
      .def_readonly("id", &ConceptNode::id)
      .def_readonly("name", &ConceptNode::name)
      .def_readonly("is_class", &ConceptNode::is_class)
      .def_readonly("image_count", &ConceptNode::image_count)
      .def_readonly("offensive", &ConceptNode::offensive)
      .def_readonly("non_visual", &ConceptNode::non_visual);

  py::class_<Taxonomy>(m, "Taxonomy")
      .def_static("load", &Taxonomy::load, py::arg("edges"), py::arg("nodes"))
      .def_static(
          "from_edges",
          [](const std::vector<std::pair<std::string, std::string>>& edges, std::vector<ConceptNode> nodes) {
            if (nodes.empty()) {
              std::vector<std::string> seen;
              for (const auto& [p, c] : edges)
                for (const auto& id : {p, c})
                  if (std::find(seen.begin(), seen.end(), id) == seen.end()) seen.push_back(id);
              for (auto& id : seen) nodes.push_back(ConceptNode{id, id});
            }
            return Taxonomy::build(std::move(nodes), edges);
          },
          py::arg("edges"), py::arg("nodes") = std::vector<ConceptNode>{},
          "Builds a taxonomy from (parent, child) pairs; nodes default to bare ids in first-seen order.")
      .def("__len__", &Taxonomy::size)
      .def_property_readonly("ids",
                             [](const Taxonomy& t) {
                               std::vector<std::string> ids;
                               for (const auto& n : t.nodes()) ids.push_back(n.id);
                               return ids;
                             })
      .def_property_readonly("leaves",
                             [](const Taxonomy& t) {
                               std::vector<std::string> ids;
                               for (auto i : leaf_indices(t)) ids.push_back(t.node(i).id);
                               return ids;
                             })
      .def_property_readonly("root", [](const Taxonomy& t) { return t.node(t.root()).id; })
      .def_property_readonly("max_depth", &Taxonomy::max_depth)
      .def("node", [](const Taxonomy& t, std::string_view id) { return t.node(t.index_of(id)); })
      .def("depth", py::overload_cast<std::string_view>(&Taxonomy::depth, py::const_))
      .def("shortest_path", py::overload_cast<std::string_view, std::string_view>(&Taxonomy::shortest_path,
                                                                                  py::const_));

  m.def(
      "raw_similarity",
      [](const Taxonomy& t, std::string_view a, std::string_view b) { return raw_similarity(t, a, b); },
      py::arg("taxonomy"), py::arg("m"), py::arg("n"));

  py::class_<SimilarityTable>(m, "SimilarityTable")
      .def_readonly("class_ids", &SimilarityTable::class_ids)
      .def_readonly("raw", &SimilarityTable::raw)
      .def_readonly("normalized", &SimilarityTable::normalized)
      .def_readonly("accept_prob", &SimilarityTable::accept_prob)
      .def("index_of", &SimilarityTable::index_of);
  m.def(
      "similarity_table",
      [](const Taxonomy& t, std::optional<std::vector<std::string>> ids, py::object norm) {
        std::vector<std::string> classes;
        if (ids) {
          classes = *ids;
        } else {
          for (auto i : leaf_indices(t)) classes.push_back(t.node(i).id);
        }
        return build_similarity_table(t, classes, enum_from<Normalization>(norm, &parse_normalization));
      },
      py::arg("taxonomy"), py::arg("class_ids") = py::none(), py::arg("normalization") = "self_ratio");

  py::class_<LossResult>(m, "LossResult")
      .def_readonly("value", &LossResult::value)
      .def_readonly("per_anchor", &LossResult::per_anchor)
      .def_readonly("grad_z", &LossResult::grad_z)
      .def_property_readonly("grad_centers", [](const LossResult& r) -> py::object {
        if (!r.has_centers) return py::none();
        return py::cast(r.grad_centers);
      });

  m.def(
      "info_nce", [](Matrix z, std::vector<int> labels, double tau) { return info_nce(batch_of(std::move(z), labels), tau); },
      py::arg("z"), py::arg("sample_labels"), py::arg("temperature") = 1.0,
      "Rows 2k and 2k+1 of z are the two views of sample k.");
  m.def(
      "supcon",
      [](Matrix z, std::vector<int> labels, double tau, bool mean) {
        return supcon(batch_of(std::move(z), labels), tau, mean);
      },
      py::arg("z"), py::arg("sample_labels"), py::arg("temperature") = 1.0, py::arg("mean_over_positives") = false);
  m.def(
      "paco",
      [](Matrix z, std::vector<int> labels, Matrix centers, double tau, bool mean) {
        return paco(batch_of(std::move(z), labels), centers, tau, mean);
      },
      py::arg("z"), py::arg("sample_labels"), py::arg("centers"), py::arg("temperature") = 1.0,
      py::arg("mean_over_positives") = false);
  m.def(
      "reco_loss",
      [](Matrix z, std::vector<int> labels, const BoolMatrix& mask, double tau, bool include_positive, bool mean) {
        return reco_loss(batch_of(std::move(z), labels), to_mask(mask), tau, include_positive, mean);
      },
      py::arg("z"), py::arg("sample_labels"), py::arg("mask"), py::arg("temperature") = 1.0,
      py::arg("include_positive_in_denominator") = true, py::arg("mean_over_positives") = false);
  m.def(
      "combined",
      [](Matrix z, std::vector<int> labels, Matrix centers, const BoolMatrix& mask, const std::string& base,
         double alpha, double tau, bool include_positive, bool mean) {
        CombinedOptions o;
        if (base == "supcon") o.base = BaseObjective::supcon;
        else if (base == "paco") o.base = BaseObjective::paco;
        else fail_config("base must be supcon or paco, got '" + base + "'");
        o.alpha = alpha;
        o.temperature = tau;
        o.include_positive_in_denominator = include_positive;
        o.mean_over_positives = mean;
        return combined(batch_of(std::move(z), labels), centers, to_mask(mask), o);
      },
      py::arg("z"), py::arg("sample_labels"), py::arg("centers"), py::arg("mask"), py::arg("base") = "supcon",
      py::arg("alpha") = 1.0, py::arg("temperature") = 1.0, py::arg("include_positive_in_denominator") = true,
      py::arg("mean_over_positives") = false);

  m.def("acceptance_matrix", &acceptance_matrix, py::arg("table"), py::arg("labels"));
  m.def(
      "draw_mask",
      [](const Matrix& probs, std::uint64_t seed, std::uint64_t step) {
        return from_mask(draw_mask(probs, SamplerConfig{seed, true}, step));
      },
      py::arg("probs"), py::arg("seed"), py::arg("step"));
  m.def("keyed_uniform", &keyed_uniform, py::arg("seed"), py::arg("step"), py::arg("i"), py::arg("k"));

  py::class_<SynthSpec>(m, "SynthSpec")
      .def(py::init<>())
      .def_readwrite("feature_dim", &SynthSpec::feature_dim)
      .def_readwrite("samples_per_class", &SynthSpec::samples_per_class)
      .def_readwrite("drift_scale", &SynthSpec::drift_scale)
      .def_readwrite("noise_scale", &SynthSpec::noise_scale)
      .def_readwrite("test_fraction", &SynthSpec::test_fraction)
      .def_readwrite("seed", &SynthSpec::seed);

  py::class_<SynthDataset>(m, "SynthDataset")
      .def_readonly("class_ids", &SynthDataset::class_ids)
      .def_readonly("sample_ids", &SynthDataset::sample_ids)
      .def_readonly("labels", &SynthDataset::labels)
      .def_readonly("realms", &SynthDataset::realms)
      .def_readonly("features", &SynthDataset::features)
      .def_readonly("class_means", &SynthDataset::class_means)
      .def_property_readonly("splits",
                             [](const SynthDataset& d) {
                               std::vector<std::string> out;
                               for (auto s : d.splits) out.emplace_back(to_string(s));
                               return out;
                             })
      .def("__len__", &SynthDataset::size)
      .def("indices", [](const SynthDataset& d, const std::string& s) {
        if (s != "train" && s != "test") fail_config("split must be train or test");
        return d.indices(s == "train" ? Split::train : Split::test);
      })
      .def("to_csv", &SynthDataset::to_csv)
      .def_static("read_csv", &SynthDataset::read_csv);

  m.def(
      "generate",
      [](const Taxonomy& t, std::optional<SynthSpec> spec, py::kwargs kw) {
        SynthSpec s = spec.value_or(SynthSpec{});
        py::object o = py::cast(&s, py::return_value_policy::reference);
        for (auto [k, v] : kw) py::setattr(o, k, v);
        return generate(t, s);
      },
      py::arg("taxonomy"), py::arg("spec") = py::none(), "Keyword arguments override SynthSpec fields.");

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_property(
          "objective", [](const TrainConfig& c) { return std::string(to_string(c.objective)); },
          [](TrainConfig& c, py::object v) { c.objective = enum_from<Objective>(v, &parse_objective); })
      .def_readwrite("alpha", &TrainConfig::alpha)
      .def_readwrite("lr_max", &TrainConfig::lr_max)
      .def_readwrite("momentum", &TrainConfig::momentum)
      .def_readwrite("weight_decay", &TrainConfig::weight_decay)
      .def_readwrite("temperature", &TrainConfig::temperature)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("hidden_dim", &TrainConfig::hidden_dim)
      .def_readwrite("embed_dim", &TrainConfig::embed_dim)
      .def_readwrite("view_noise", &TrainConfig::view_noise)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("resample_every_step", &TrainConfig::resample_every_step)
      .def_readwrite("include_positive_in_denominator", &TrainConfig::include_positive_in_denominator)
      .def_readwrite("mean_over_positives", &TrainConfig::mean_over_positives)
      .def_property(
          "normalization", [](const TrainConfig& c) { return std::string(to_string(c.normalization)); },
          [](TrainConfig& c, py::object v) { c.normalization = enum_from<Normalization>(v, &parse_normalization); });

  py::class_<Encoder>(m, "Encoder")
      .def_static("initialize", &Encoder::initialize, py::arg("input_dim"), py::arg("hidden_dim"),
                  py::arg("output_dim"), py::arg("seed"))
      .def_static("load", &Encoder::load)
      .def("save", &Encoder::save)
      .def("embed", &Encoder::embed)
      .def("parameters", &Encoder::parameters)
      .def("set_parameters", &Encoder::set_parameters)
      .def("to_bytes", [](const Encoder& e) { return py::bytes(e.to_bytes()); })
      .def_static("from_bytes", [](py::bytes b) { return Encoder::from_bytes(std::string(b)); })
      .def("__eq__", &Encoder::operator==);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("initial", &TrainResult::initial)
      .def_readonly("encoder", &TrainResult::encoder)
      .def_readonly("centers", &TrainResult::centers)
      .def_readonly("history", &TrainResult::history)
      .def_readonly("steps", &TrainResult::steps);

  m.def(
      "train",
      [](const SynthDataset& d, const Taxonomy& t, std::optional<TrainConfig> cfg, py::kwargs kw) {
        TrainConfig c = cfg.value_or(TrainConfig{});
        py::object o = py::cast(&c, py::return_value_policy::reference);
        for (auto [k, v] : kw) py::setattr(o, k, v);
        py::gil_scoped_release release;
        return train(d, t, c);
      },
      py::arg("dataset"), py::arg("taxonomy"), py::arg("config") = py::none(),
      "Keyword arguments override TrainConfig fields.");
  m.def("lr_at", &lr_at, py::arg("config"), py::arg("step"), py::arg("total_steps"));

  py::class_<LinearClassifier>(m, "LinearClassifier")
      .def_readonly("weights", &LinearClassifier::weights)
      .def_readonly("bias", &LinearClassifier::bias)
      .def_readonly("objective", &LinearClassifier::objective)
      .def_readonly("grad_norm", &LinearClassifier::grad_norm)
      .def_readonly("iterations", &LinearClassifier::iterations)
      .def_readonly("degenerate", &LinearClassifier::degenerate)
      .def("predict", &LinearClassifier::predict);
  m.def(
      "fit_linear_probe",
      [](const Matrix& x, const std::vector<int>& y, int classes, double l2, int max_iter, double tol) {
        return fit_linear_probe(x, y, classes, ProbeOptions{l2, max_iter, tol});
      },
      py::arg("features"), py::arg("labels"), py::arg("num_classes"), py::arg("l2") = 1e-4,
      py::arg("max_iter") = 5000, py::arg("tolerance") = 1e-6);

  py::class_<ProbeResult>(m, "ProbeResult")
      .def(py::init([](std::string realm, long long n_correct, long long n_test) {
             if (n_test <= 0 || n_correct < 0 || n_correct > n_test) fail_data("need 0 <= n_correct <= n_test, n_test > 0");
             return ProbeResult{std::move(realm), static_cast<double>(n_correct) / static_cast<double>(n_test), n_test,
                                n_correct};
           }),
           py::arg("realm"), py::arg("n_correct"), py::arg("n_test"))
      .def_readonly("realm", &ProbeResult::realm)
      .def_readonly("top1", &ProbeResult::top1)
      .def_readonly("n_test", &ProbeResult::n_test)
      .def_readonly("n_correct", &ProbeResult::n_correct);
  m.def("evaluate", &evaluate, py::arg("classifier"), py::arg("features"), py::arg("labels"), py::arg("realm") = "");
  m.def(
      "probe_realms", [](const Matrix& f, const SynthDataset& d) { return probe_realms(f, d); }, py::arg("features"),
      py::arg("dataset"));

  py::class_<RelativeReport>(m, "RelativeReport")
      .def_readonly("realms", &RelativeReport::realms)
      .def_readonly("delta_pp", &RelativeReport::delta_pp)
      .def_readonly("average", &RelativeReport::average)
      .def("to_csv", &report_csv)
      .def("to_svg", &report_svg, py::arg("title") = "");
  m.def("relative_report", &relative_report, py::arg("candidate"), py::arg("baseline"));
  m.def("read_results_csv", &read_results_csv);

  m.def("class_cosine_matrix", &class_cosine_matrix, py::arg("embeddings"), py::arg("labels"),
        py::arg("num_classes"));
  m.def("taxonomy_alignment", &taxonomy_alignment, py::arg("table"), py::arg("class_cosines"));

  m.def(
      "filter_concepts",
      [](const Taxonomy& t, long long min_images) {
        const auto r = filter_concepts(t, min_images);
        std::vector<std::pair<std::string, std::string>> rejected;
        for (const auto& x : r.rejected) rejected.emplace_back(x.id, describe(x.rule));
        return py::make_tuple(r.valid, rejected);
      },
      py::arg("taxonomy"), py::arg("min_images") = 200, "Returns (valid ids, [(id, first failing rule)]).");
  m.def(
      "select_realms",
      [](const Taxonomy& t, const std::vector<std::string>& valid, const std::vector<std::string>& candidates,
         const std::vector<std::string>& excluded, std::size_t min_classes) {
        std::vector<py::tuple> out;
        for (const auto& r : select_realms(t, valid, candidates, excluded, min_classes)) {
          out.push_back(py::make_tuple(r.root_concept, std::string(to_string(r.status)), r.valid_classes));
        }
        return out;
      },
      py::arg("taxonomy"), py::arg("valid"), py::arg("candidates"), py::arg("excluded") = std::vector<std::string>{},
      py::arg("min_classes") = 20, "Returns [(root, status, valid classes)] in taxonomy order.");

  m.def(
      "dhash", [](py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> a) {
        return dhash(image_from_array(a));
      },
      py::arg("image"));
  m.def("hash_hex", &hash_hex);
  m.def(
      "dedup",
      [](const std::filesystem::path& candidates, const std::vector<std::filesystem::path>& references,
         int max_hamming) {
        std::vector<std::vector<ManifestEntry>> refs;
        for (const auto& r : references) refs.push_back(read_manifest(r));
        const auto res = dedup(read_manifest(candidates), refs, DedupOptions{max_hamming});
        std::vector<py::tuple> removed;
        for (const auto& r : res.removed) removed.push_back(py::make_tuple(r.id, r.matched_reference, r.reason));
        return py::make_tuple(res.kept, removed, res.warnings);
      },
      py::arg("candidates"), py::arg("references"), py::arg("max_hamming") = 0,
      "Manifest paths in; returns (kept ids, [(id, reference, reason)], warnings).");
}
