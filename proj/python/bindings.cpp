// Python bindings for the mdpm core: feature files, transactions, mining,
// element selection, encodings, linear models and the context analyzer.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <memory>

#include "mdpm/context.hpp"
#include "mdpm/elements.hpp"
#include "mdpm/encode.hpp"
#include "mdpm/error.hpp"
#include "mdpm/featstore.hpp"
#include "mdpm/lda.hpp"
#include "mdpm/learn.hpp"
#include "mdpm/miner.hpp"
#include "mdpm/pipeline.hpp"
#include "mdpm/synthgen.hpp"
#include "mdpm/transact.hpp"

namespace py = pybind11;
using namespace mdpm;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<Item> items_of(const ItemSet& s) { return {s.begin(), s.end()}; }

MiningConfig make_config(const std::string& supp_min, const std::string& conf_min,
                         std::uint32_t min_len, std::uint32_t max_len, unsigned workers) {
  MiningConfig cfg;
  cfg.supp_min = Fraction::parse(supp_min);
  cfg.conf_min = Fraction::parse(conf_min);
  cfg.min_len = min_len;
  cfg.max_len = max_len;
  cfg.workers = workers;
  cfg.validate();
  return cfg;
}

std::vector<std::vector<double>> rows_of(const DoubleArray& x) {
  if (x.ndim() != 2) throw ValidationError("expected a 2-d array");
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(x.shape(0)));
  const auto cols = static_cast<std::size_t>(x.shape(1));
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].assign(x.data(i, 0), x.data(i, 0) + cols);
  return rows;
}

/// (image_ids, labels, matrix) from per-image encodings.
py::tuple encoded_arrays(const std::vector<EncodedImage>& images) {
  const std::size_t cols = images.empty() ? 0 : images[0].values.size();
  py::array_t<std::uint32_t> ids(static_cast<py::ssize_t>(images.size()));
  py::array_t<std::int32_t> labels(static_cast<py::ssize_t>(images.size()));
  py::array_t<double> values({static_cast<py::ssize_t>(images.size()), static_cast<py::ssize_t>(cols)});
  for (std::size_t i = 0; i < images.size(); ++i) {
    ids.mutable_at(static_cast<py::ssize_t>(i)) = images[i].image_id;
    labels.mutable_at(static_cast<py::ssize_t>(i)) = images[i].label;
    std::memcpy(values.mutable_data(static_cast<py::ssize_t>(i), 0), images[i].values.data(),
                cols * sizeof(double));
  }
  return py::make_tuple(ids, labels, values);
}

}  // namespace

PYBIND11_MODULE(_mdpm, m) {
  m.doc() = "Mid-level pattern mining: association rules over patch activations.";

  auto base = py::register_exception<Error>(m, "MdpmError", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<TruncationError>(m, "TruncationError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<EmptyInputError>(m, "EmptyInputError", base.ptr());
  py::register_exception<UndefinedError>(m, "UndefinedError", base.ptr());
  py::register_exception<SingularMatrixError>(m, "SingularMatrixError", base.ptr());

  m.attr("BACKGROUND_LABEL") = kBackgroundLabel;

  // -- feature store ---------------------------------------------------------
  py::class_<PatchGeometry>(m, "PatchGeometry")
      .def(py::init([](std::uint16_t x, std::uint16_t y, std::uint16_t w, std::uint16_t h, float scale) {
             return PatchGeometry{x, y, w, h, scale};
           }),
           py::arg("x"), py::arg("y"), py::arg("w"), py::arg("h"), py::arg("scale") = 1.0f)
      .def_readwrite("x", &PatchGeometry::x)
      .def_readwrite("y", &PatchGeometry::y)
      .def_readwrite("w", &PatchGeometry::w)
      .def_readwrite("h", &PatchGeometry::h)
      .def_readwrite("scale", &PatchGeometry::scale)
      .def("__eq__", [](const PatchGeometry& a, const PatchGeometry& b) { return a == b; })
      .def("__repr__", [](const PatchGeometry& g) {
        return "PatchGeometry(x=" + std::to_string(g.x) + ", y=" + std::to_string(g.y) +
               ", w=" + std::to_string(g.w) + ", h=" + std::to_string(g.h) + ")";
      });

  py::class_<FeatureStore>(m, "FeatureStore")
      .def(py::init<std::uint32_t>(), py::arg("dim"))
      .def("add",
           [](FeatureStore& s, std::uint32_t image_id, std::int32_t label, const PatchGeometry& g,
              const FloatArray& activation) {
             PatchRecord r;
             r.image_id = image_id;
             r.class_label = label;
             r.geometry = g;
             r.activation.assign(activation.data(), activation.data() + activation.size());
             s.add(std::move(r));
           },
           py::arg("image_id"), py::arg("label"), py::arg("geometry"), py::arg("activation"))
      .def_property_readonly("dim", &FeatureStore::dim)
      .def("__len__", &FeatureStore::size)
      .def_property_readonly("image_count", &FeatureStore::image_count)
      .def("activations",
           [](const FeatureStore& s) {
             py::array_t<float> a({static_cast<py::ssize_t>(s.size()), static_cast<py::ssize_t>(s.dim())});
             for (std::size_t i = 0; i < s.size(); ++i) {
               std::memcpy(a.mutable_data(static_cast<py::ssize_t>(i), 0), s[i].activation.data(),
                           s.dim() * sizeof(float));
             }
             return a;
           },
           "Records x dim activation matrix (a copy).")
      .def("labels",
           [](const FeatureStore& s) {
             std::vector<std::int32_t> v;
             for (const auto& r : s.records()) v.push_back(r.class_label);
             return py::array_t<std::int32_t>(static_cast<py::ssize_t>(v.size()), v.data());
           })
      .def("image_ids",
           [](const FeatureStore& s) {
             std::vector<std::uint32_t> v;
             for (const auto& r : s.records()) v.push_back(r.image_id);
             return py::array_t<std::uint32_t>(static_cast<py::ssize_t>(v.size()), v.data());
           })
      .def("geometry", [](const FeatureStore& s, std::size_t pos) {
        if (pos >= s.size()) throw py::index_error("record position out of range");
        return s[pos].geometry;
      })
      .def("__eq__", [](const FeatureStore& a, const FeatureStore& b) { return a == b; });

  m.def("read_featfile", py::overload_cast<const std::filesystem::path&>(&read_featfile), py::arg("path"));
  m.def("write_featfile",
        py::overload_cast<const FeatureStore&, const std::filesystem::path&>(&write_featfile),
        py::arg("store"), py::arg("path"));
  m.def("sample_patch_grid", &sample_patch_grid, py::arg("image_w"), py::arg("image_h"),
        py::arg("patch") = 128, py::arg("stride") = 32);

  // -- transactions and mining ----------------------------------------------
  m.def("top_k_indices",
        [](const FloatArray& v, std::uint32_t k) {
          return items_of(top_k_indices(std::span<const float>(v.data(), static_cast<std::size_t>(v.size())), k));
        },
        py::arg("activation"), py::arg("k"));

  py::class_<TransactionDatabase>(m, "TransactionDatabase")
      .def(py::init<std::uint32_t, std::uint32_t>(), py::arg("dim"), py::arg("k"))
      .def("add",
           [](TransactionDatabase& db, std::vector<Item> items, bool positive) {
             db.add({ItemSet(std::move(items)), positive ? db.pos_item() : db.neg_item()});
           },
           py::arg("items"), py::arg("positive") = true)
      .def_property_readonly("dim", &TransactionDatabase::dim)
      .def_property_readonly("pos_item", &TransactionDatabase::pos_item)
      .def_property_readonly("neg_item", &TransactionDatabase::neg_item)
      .def_property_readonly("pos_count", &TransactionDatabase::pos_count)
      .def_property_readonly("neg_count", &TransactionDatabase::neg_count)
      .def("__len__", &TransactionDatabase::size)
      .def("transaction", [](const TransactionDatabase& db, std::size_t i) {
        if (i >= db.size()) throw py::index_error("transaction index out of range");
        auto v = items_of(db[i].items);
        v.push_back(db[i].class_item);
        return v;
      });

  m.def("build_database", &build_database, py::arg("store"), py::arg("k"), py::arg("target"),
        py::arg("workers") = 1u);
  m.def("support",
        [](const TransactionDatabase& db, std::vector<Item> items) { return support(db, ItemSet(std::move(items))); },
        py::arg("db"), py::arg("items"));
  m.def("confidence",
        [](const TransactionDatabase& db, std::vector<Item> antecedent, Item consequent) {
          return confidence(db, ItemSet(std::move(antecedent)), consequent);
        },
        py::arg("db"), py::arg("antecedent"), py::arg("consequent"));

  py::class_<Pattern>(m, "Pattern")
      .def(py::init([](std::vector<Item> items, std::int32_t category) {
             Pattern p;
             p.items = ItemSet(std::move(items));
             p.category = category;
             return p;
           }),
           py::arg("items"), py::arg("category") = 0)
      .def_property_readonly("items", [](const Pattern& p) { return items_of(p.items); })
      .def_readonly("support", &Pattern::support)
      .def_readonly("confidence", &Pattern::confidence)
      .def_readonly("category", &Pattern::category)
      .def_readonly("count", &Pattern::count)
      .def_readonly("rule_count", &Pattern::rule_count)
      .def_readonly("total", &Pattern::total)
      .def("__repr__", [](const Pattern& p) {
        std::string s = "Pattern([";
        for (std::size_t i = 0; i < p.items.size(); ++i) s += (i ? ", " : "") + std::to_string(p.items[i]);
        return s + "], support=" + std::to_string(p.support) + ", confidence=" + std::to_string(p.confidence) + ")";
      });

  m.def("mine_rules",
        [](const TransactionDatabase& db, const std::string& supp_min, const std::string& conf_min,
           std::uint32_t min_len, std::uint32_t max_len, std::optional<Item> consequent,
           unsigned workers) {
          auto cfg = make_config(supp_min, conf_min, min_len, max_len, workers);
          cfg.consequent = consequent;
          py::gil_scoped_release release;
          return mine_rules(db, cfg);
        },
        py::arg("db"), py::arg("supp_min") = "0.0001", py::arg("conf_min") = "0.3",
        py::arg("min_len") = 2u, py::arg("max_len") = 8u, py::arg("consequent") = py::none(),
        py::arg("workers") = 1u,
        "Patterns with support > supp_min and confidence > conf_min (thresholds as decimal strings).");
  m.def("mine_category",
        [](const FeatureStore& store, std::uint32_t k, std::int32_t target, const std::string& supp_min,
           const std::string& conf_min, std::uint32_t min_len, std::uint32_t max_len, unsigned workers) {
          const auto cfg = make_config(supp_min, conf_min, min_len, max_len, workers);
          py::gil_scoped_release release;
          return mine_category(store, k, target, cfg);
        },
        py::arg("store"), py::arg("k") = 20u, py::arg("target") = 0, py::arg("supp_min") = "0.0001",
        py::arg("conf_min") = "0.3", py::arg("min_len") = 2u, py::arg("max_len") = 8u,
        py::arg("workers") = 1u);

  // -- elements ------------------------------------------------------------
  py::class_<MidLevelElement>(m, "MidLevelElement")
      .def_readonly("pattern", &MidLevelElement::pattern)
      .def_readonly("members", &MidLevelElement::members)
      .def_readonly("member_images", &MidLevelElement::member_images)
      .def_property_readonly("coverage", [](const MidLevelElement& e) { return coverage(e); });

  m.def("retrieve_category",
        [](const FeatureStore& store, std::uint32_t k, std::int32_t target,
           const std::vector<Pattern>& patterns, unsigned workers) {
          return retrieve_category(store, k, target, patterns, workers);
        },
        py::arg("store"), py::arg("k"), py::arg("target"),
        py::arg("patterns"), py::arg("workers") = 1u);
  m.def("select_top_patterns", &select_top_patterns, py::arg("elements"), py::arg("x") = 50u);

  py::class_<Detector>(m, "Detector")
      .def_readonly("weights", &Detector::weights)
      .def_readonly("category", &Detector::category)
      .def_readonly("source_element_ids", &Detector::source_element_ids)
      .def("score", [](const Detector& d, const FloatArray& x) {
        return d.score(std::span<const float>(x.data(), static_cast<std::size_t>(x.size())));
      });
  py::class_<MergedElement>(m, "MergedElement")
      .def_readonly("sources", &MergedElement::sources)
      .def_readonly("members", &MergedElement::members)
      .def_readonly("member_images", &MergedElement::member_images)
      .def_readonly("category", &MergedElement::category);
  m.def("merge_category",
        [](const std::vector<MidLevelElement>& elements, const FeatureStore& store, std::int32_t category,
           double threshold, double shrinkage, unsigned workers) {
          const auto stats = estimate_background(store, background_positions(store, category), shrinkage);
          auto result = ensemble_merge(elements, store, stats, threshold, workers);
          return py::make_tuple(result.elements, result.detectors);
        },
        py::arg("elements"), py::arg("store"), py::arg("category"), py::arg("threshold"),
        py::arg("shrinkage") = kDefaultShrinkage, py::arg("workers") = 1u,
        "Greedy LDA ensemble merge of one category's elements; returns (merged, detectors).");

  // -- encodings -----------------------------------------------------------
  m.def("encode_store_bop",
        [](const FeatureStore& store, const std::vector<Pattern>& patterns, const std::string& pyramid,
           std::uint32_t image_w, std::uint32_t image_h, unsigned workers) {
          const auto layout = PyramidLayout::parse(pyramid);
          return encoded_arrays(encode_store_bop(store, patterns, layout, {image_w, image_h}, workers));
        },
        py::arg("store"), py::arg("patterns"), py::arg("pyramid") = "1x1+2x2", py::arg("image_w") = 0u,
        py::arg("image_h") = 0u, py::arg("workers") = 1u,
        "Bag-of-Patterns per image; returns (image_ids, labels, matrix).");
  m.def("encode_store_boe",
        [](const std::vector<const FeatureStore*>& scales, const std::vector<Detector>& detectors,
           const std::string& pyramid, std::uint32_t image_w, std::uint32_t image_h, unsigned workers) {
          const auto layout = PyramidLayout::parse(pyramid);
          return encoded_arrays(encode_store_boe(scales, detectors, layout, {image_w, image_h}, workers));
        },
        py::arg("scales"), py::arg("detectors"), py::arg("pyramid") = "1x1+2x2", py::arg("image_w") = 0u,
        py::arg("image_h") = 0u, py::arg("workers") = 1u,
        "Bag-of-Elements per image; returns (image_ids, labels, matrix).");

  // -- learning ------------------------------------------------------------
  py::class_<LinearModel>(m, "LinearModel")
      .def_readonly("categories", &LinearModel::categories)
      .def_readonly("weights", &LinearModel::weights)
      .def_readonly("biases", &LinearModel::biases)
      .def_readonly("lambdas", &LinearModel::lambdas)
      .def("decision_scores",
           [](const LinearModel& model, const DoubleArray& x) {
             return decision_scores(model, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
           })
      .def("predict", [](const LinearModel& model, const DoubleArray& x) {
        return predict(model, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
      });
  m.def("train_ovr",
        [](const DoubleArray& x, std::vector<std::int32_t> labels, std::vector<double> reg_grid,
           std::uint32_t folds, std::uint64_t seed, unsigned workers) {
          SvmOptions opt;
          opt.reg_grid = std::move(reg_grid);
          opt.folds = folds;
          opt.seed = seed;
          opt.workers = workers;
          const auto rows = rows_of(x);
          py::gil_scoped_release release;
          return train_ovr(rows, labels, opt);
        },
        py::arg("x"), py::arg("labels"), py::arg("reg_grid") = std::vector<double>{0.01, 0.1, 1.0, 10.0},
        py::arg("folds") = 5u, py::arg("seed") = 0u, py::arg("workers") = 1u);
  m.def("accuracy",
        [](const LinearModel& model, const DoubleArray& x, std::vector<std::int32_t> labels) {
          return accuracy(model, rows_of(x), labels);
        },
        py::arg("model"), py::arg("x"), py::arg("labels"));
  m.def("average_precision",
        [](std::vector<double> scores, std::vector<bool> positives) {
          std::unique_ptr<bool[]> flags(new bool[positives.size()]);
          std::copy(positives.begin(), positives.end(), flags.get());
          return average_precision(scores, std::span<const bool>(flags.get(), positives.size()));
        },
        py::arg("scores"), py::arg("positives"));

  // -- context -------------------------------------------------------------
  py::enum_<FiringType>(m, "FiringType")
      .value("SCENE_CONTEXT", FiringType::SceneContext)
      .value("OBJECT_CONTEXT", FiringType::ObjectContext)
      .value("GROUND_TRUTH_OBJECT", FiringType::GroundTruthObject)
      .value("UNRESOLVED", FiringType::Unresolved);
  m.def("classify_firing",
        [](double gt, double ot, double sc) { return classify_firing(OverlapRatios{gt, ot, sc}); },
        py::arg("gt"), py::arg("ot"), py::arg("sc"));
  m.def("overlap_ratios",
        [](const PatchGeometry& box, const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& mask) {
          if (mask.ndim() != 2) throw ValidationError("mask must be a 2-d array (height, width)");
          const auto h = static_cast<std::uint16_t>(mask.shape(0));
          const auto w = static_cast<std::uint16_t>(mask.shape(1));
          const PixelMasks masks(w, h, std::vector<std::uint8_t>(mask.data(), mask.data() + mask.size()));
          const auto r = overlap_ratios(box, masks);
          return py::make_tuple(r.gt, r.ot, r.sc);
        },
        py::arg("box"), py::arg("mask"), "Mask labels: 0 scene, 1 ground truth, 2 other object.");

  // -- synthetic data --------------------------------------------------------
  py::class_<SynthSpec>(m, "SynthSpec")
      .def(py::init<>())
      .def_readwrite("dim", &SynthSpec::dim)
      .def_readwrite("categories", &SynthSpec::categories)
      .def_readwrite("images_per_category", &SynthSpec::images_per_category)
      .def_readwrite("patches_per_image", &SynthSpec::patches_per_image)
      .def_readwrite("concepts_per_category", &SynthSpec::concepts_per_category)
      .def_readwrite("items_per_concept", &SynthSpec::items_per_concept)
      .def_readwrite("signal", &SynthSpec::signal)
      .def_readwrite("noise_spread", &SynthSpec::noise_spread)
      .def_readwrite("noise_density", &SynthSpec::noise_density)
      .def_readwrite("p_plant", &SynthSpec::p_plant)
      .def_readwrite("p_leak", &SynthSpec::p_leak)
      .def_readwrite("background_images", &SynthSpec::background_images)
      .def_readwrite("seed", &SynthSpec::seed)
      .def_readwrite("layout_seed", &SynthSpec::layout_seed)
      .def_readwrite("image_size", &SynthSpec::image_size)
      .def_readwrite("patch", &SynthSpec::patch)
      .def_readwrite("stride", &SynthSpec::stride)
      .def_readwrite("mining_k", &SynthSpec::mining_k)
      .def("validate", &SynthSpec::validate);

  py::class_<SynthDataset>(m, "SynthDataset")
      .def_readonly("store", &SynthDataset::store)
      .def_property_readonly("concepts",
                             [](const SynthDataset& d) {
                               std::vector<std::vector<Item>> out;
                               for (const auto& c : d.concepts) out.push_back(items_of(c));
                               return out;
                             })
      .def_readonly("concepts_per_category", &SynthDataset::concepts_per_category)
      .def_readonly("record_concept", &SynthDataset::record_concept)
      .def_readonly("warnings", &SynthDataset::warnings);
  m.def("generate_dataset", &generate_dataset, py::arg("spec"));

  m.def("planted_recovery_report",
        [](const std::vector<Pattern>& mined, const std::vector<std::vector<Item>>& truth) {
          std::vector<ItemSet> sets;
          for (const auto& t : truth) sets.emplace_back(t);
          const auto r = planted_recovery_report(mined, sets);
          py::dict d;
          d["precision"] = r.precision;
          d["recall"] = r.recall;
          d["concept_hit"] = r.concept_hit;
          d["no_patterns"] = r.no_patterns;
          return d;
        },
        py::arg("mined"), py::arg("truth"));
}
