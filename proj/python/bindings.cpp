#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "fsl/cal_loss.hpp"
#include "fsl/cli.hpp"
#include "fsl/ensemble.hpp"
#include "fsl/io/fseb.hpp"
#include "fsl/io/synthetic.hpp"
#include "fsl/metrics.hpp"
#include "fsl/protonet.hpp"

namespace py = pybind11;
using namespace fsl;

namespace {

using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using F32Array = py::array_t<float, py::array::c_style | py::array::forcecast>;

TensorD to_tensor(const F64Array& a, std::size_t rank, const char* what) {
    if (static_cast<std::size_t>(a.ndim()) != rank) {
        throw InvalidArgument(std::string(what) + " must have " + std::to_string(rank) + " dimensions");
    }
    Shape shape(a.shape(), a.shape() + a.ndim());
    return TensorD(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

F64Array to_array(const TensorD& t) {
    F64Array out(std::vector<py::ssize_t>(t.shape().begin(), t.shape().end()));
    std::copy(t.vec().begin(), t.vec().end(), out.mutable_data());
    return out;
}

std::vector<TensorD> split_groups(const F64Array& support) {
    const TensorD s = to_tensor(support, 3, "support");
    const std::size_t n = s.dim(0), k = s.dim(1), d = s.dim(2);
    std::vector<TensorD> groups;
    for (std::size_t c = 0; c < n; ++c) {
        groups.emplace_back(Shape{k, d}, std::vector<double>(&s[c * k * d], &s[c * k * d] + k * d));
    }
    return groups;
}

py::dict metrics_dict(const MetricsReport& r) {
    py::list per_class;
    for (const ClassMetrics& c : r.per_class) {
        per_class.append(py::dict(py::arg("precision") = c.precision, py::arg("recall") = c.recall,
                                  py::arg("f1") = c.f1, py::arg("support") = c.support));
    }
    return py::dict(py::arg("accuracy") = r.accuracy, py::arg("macro_precision") = r.macro_precision,
                    py::arg("macro_recall") = r.macro_recall, py::arg("macro_f1") = r.macro_f1,
                    py::arg("per_class") = per_class, py::arg("confusion") = r.confusion.counts);
}

}  // namespace

PYBIND11_MODULE(_pyfsl, m) {
    m.doc() = "Prototypical few-shot learning core";

    static py::exception<Error> base(m, "FslError", PyExc_RuntimeError);
    static py::exception<FormatError> format(m, "FormatError", base.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const FormatError& e) {
            PyErr_SetObject(format.ptr(), py::make_tuple(e.what(), to_string(e.kind())).ptr());
        } catch (const Error& e) {
            PyErr_SetString(base.ptr(), e.what());
        }
    });

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::vector<const char*> argv{"fsl"};
            for (const auto& a : args) argv.push_back(a.c_str());
            std::ostringstream out, err;
            int rc;
            {
                py::gil_scoped_release release;
                rc = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
            }
            return py::make_tuple(rc, out.str(), err.str());
        },
        py::arg("args"), "Run an fsl subcommand; returns (exit code, stdout, stderr).");

    m.def(
        "gen_synthetic",
        [](std::size_t n_classes, std::size_t dim, std::vector<std::size_t> counts, double separation, double sigma,
           std::uint64_t seed) {
            io::SyntheticSpec spec{n_classes, dim, std::move(counts), separation, sigma, seed};
            const io::SyntheticData syn = io::gen_synthetic(spec);
            const Dataset& data = syn.dataset;
            F32Array x({static_cast<py::ssize_t>(data.index.size()), static_cast<py::ssize_t>(dim)});
            std::vector<std::int64_t> labels;
            for (std::size_t i = 0; i < data.index.size(); ++i) {
                const SampleRecord& s = data.index.sample(i);
                std::copy_n(data.payload->data() + s.offset, dim, x.mutable_data() + i * dim);
                labels.push_back(static_cast<std::int64_t>(s.class_id));
            }
            return py::make_tuple(x, py::array_t<std::int64_t>(static_cast<py::ssize_t>(labels.size()), labels.data()));
        },
        py::arg("n_classes") = 4, py::arg("dim") = 16, py::arg("counts") = std::vector<std::size_t>{100},
        py::arg("separation") = 6.0, py::arg("sigma") = 1.0, py::arg("seed") = 0);

    m.def(
        "compute_prototypes", [](const F64Array& support) { return to_array(compute_prototypes(split_groups(support)).matrix); },
        py::arg("support"), "Class means of an [n_way, k_shot, dim] support array.");

    m.def(
        "classify",
        [](const F64Array& queries, const F64Array& prototypes) {
            const TensorD q = to_tensor(queries, 2, "queries");
            const TensorD p = to_tensor(prototypes, 2, "prototypes");
            const auto preds = classify(q, p);
            TensorD dist(Shape{q.dim(0), p.dim(0)}), prob(Shape{q.dim(0), p.dim(0)});
            for (std::size_t i = 0; i < preds.size(); ++i) {
                std::copy(preds[i].distances.begin(), preds[i].distances.end(), dist.row(i).begin());
                std::copy(preds[i].probabilities.begin(), preds[i].probabilities.end(), prob.row(i).begin());
            }
            return py::make_tuple(to_array(dist), to_array(prob));
        },
        py::arg("queries"), py::arg("prototypes"), "Squared distances and softmax probabilities.");

    m.def(
        "cal_loss",
        [](const F64Array& support, double margin) {
            const std::vector<TensorD> groups = split_groups(support);
            const std::size_t n = groups.size(), k = groups[0].dim(0), d = groups[0].dim(1);
            if (n < 2) throw InvalidArgument("cal_loss needs at least two classes");
            const auto protos = compute_prototypes(groups);
            std::vector<CalTerms> terms;
            for (std::size_t c = 0; c < n; ++c) {
                TensorD neg(Shape{(n - 1) * k, d});
                std::size_t r = 0;
                for (std::size_t o = 0; o < n; ++o) {
                    if (o == c) continue;
                    std::copy_n(&groups[o][0], k * d, &neg[r++ * k * d]);
                }
                terms.push_back(cal_terms<double>(protos.matrix.row(c), groups[c], neg));
            }
            return cal_loss(terms, margin);
        },
        py::arg("support"), py::arg("margin") = kDefaultMargin, "Class-aware loss of an [n_way, k_shot, dim] support array.");

    m.def(
        "hard_vote",
        [](const std::vector<std::size_t>& labels, const std::vector<double>& mean_probabilities) {
            const VoteResult v = hard_vote(labels, mean_probabilities);
            return py::make_tuple(v.label, v.tie);
        },
        py::arg("labels"), py::arg("mean_probabilities") = std::vector<double>{});

    m.def(
        "soft_vote",
        [](const std::vector<std::vector<double>>& probabilities) {
            const SoftVoteResult v = soft_vote(probabilities);
            return py::make_tuple(v.label, v.mean);
        },
        py::arg("probabilities"));

    m.def(
        "metrics",
        [](const std::vector<std::size_t>& truths, const std::vector<std::size_t>& predictions,
           std::vector<std::string> class_names) {
            return metrics_dict(report(confusion(truths, predictions, std::move(class_names))));
        },
        py::arg("truths"), py::arg("predictions"), py::arg("class_names"));

    m.def(
        "write_embedding_store",
        [](const std::string& path, const std::vector<std::string>& ids, const F32Array& vectors,
           const std::string& provenance) {
            if (vectors.ndim() != 2 || static_cast<std::size_t>(vectors.shape(0)) != ids.size()) {
                throw InvalidArgument("vectors must be [len(ids), dim]");
            }
            const std::size_t d = static_cast<std::size_t>(vectors.shape(1));
            FrozenEmbeddingStore store(d, provenance);
            for (std::size_t i = 0; i < ids.size(); ++i) {
                store.insert(ids[i], std::vector<float>(vectors.data() + i * d, vectors.data() + (i + 1) * d));
            }
            io::write_embedding_store(path, store);
        },
        py::arg("path"), py::arg("ids"), py::arg("vectors"), py::arg("provenance") = "");

    m.def(
        "read_embedding_store",
        [](const std::string& path) {
            const FrozenEmbeddingStore store = io::read_embedding_store(path);
            const std::size_t d = store.source_dim();
            F32Array x({static_cast<py::ssize_t>(store.size()), static_cast<py::ssize_t>(d)});
            for (std::size_t i = 0; i < store.size(); ++i) {
                std::copy_n(store.vector_at(i).data(), d, x.mutable_data() + i * d);
            }
            return py::make_tuple(store.ids(), x, store.provenance());
        },
        py::arg("path"), "Returns (ids, vectors, provenance).");
}
