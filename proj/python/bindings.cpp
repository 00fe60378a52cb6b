#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "editnts/errors.hpp"
#include "editnts/executor.hpp"
#include "editnts/metrics.hpp"
#include "editnts/oracle.hpp"
#include "editnts/pipeline.hpp"
#include "editnts/toy_corpus.hpp"

namespace py = pybind11;
using namespace editnts;

namespace {

EditProgram to_program(const std::vector<std::string>& labels) {
  EditProgram z;
  for (const auto& l : labels) z.push_back(EditLabel::parse(l));
  return z;
}

std::vector<std::string> to_strings(const EditProgram& z) {
  std::vector<std::string> out;
  for (const auto& l : z) out.push_back(l.to_string());
  return out;
}

metrics::SariOptions sari_options(const std::string& delete_mode, const std::string& empty,
                                  const std::string& aggregation) {
  metrics::SariOptions o;
  if (delete_mode == "precision") o.delete_mode = metrics::DeleteMode::kPrecision;
  else if (delete_mode != "f1") throw std::invalid_argument("delete_mode is f1 or precision");
  if (empty == "zero") o.empty = metrics::EmptyConvention::kZero;
  else if (empty != "vacuous") throw std::invalid_argument("empty is vacuous or zero");
  if (aggregation == "micro") o.aggregation = metrics::Aggregation::kMicro;
  else if (aggregation != "macro") throw std::invalid_argument("aggregation is macro or micro");
  return o;
}

py::dict score_dict(const metrics::SariScore& s) {
  py::dict d;
  d["sari"] = s.sari;
  d["add"] = s.add;
  d["delete"] = s.del;
  d["keep"] = s.keep;
  return d;
}

}  // namespace

PYBIND11_MODULE(_editnts, m) {
  m.doc() = "Edit-program sentence simplification";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_IOError);
  py::register_exception<PointerOverflow>(m, "PointerOverflow", PyExc_ValueError);
  py::register_exception<HaltedError>(m, "HaltedError", PyExc_ValueError);

  m.def(
      "construct_program",
      [](const Tokens& x, const Tokens& y, bool delete_first) {
        return to_strings(construct_program(x, y, delete_first ? TieBreak::kDeleteFirst : TieBreak::kAddFirst));
      },
      py::arg("source"), py::arg("target"), py::arg("delete_first") = false);

  m.def(
      "execute",
      [](const Tokens& x, const std::vector<std::string>& program, bool pad) {
        return execute(x, to_program(program), pad);
      },
      py::arg("source"), py::arg("program"), py::arg("pad") = true);

  m.def(
      "validate",
      [](const Tokens& x, const std::vector<std::string>& program) {
        const auto d = validate(x, to_program(program));
        py::dict out;
        out["valid"] = d.valid();
        out["problem"] = d.valid() ? std::string() : d.describe();
        out["position"] = d.position;
        out["padded_keeps"] = d.padded_keeps;
        return out;
      },
      py::arg("source"), py::arg("program"));

  m.def(
      "label_counts",
      [](const std::vector<std::vector<std::string>>& programs) {
        KindCounts c;
        for (const auto& p : programs) {
          const auto k = count_kinds(to_program(p));
          for (std::size_t i = 0; i < kNumEditKinds; ++i) c.n[i] += k.n[i];
        }
        py::dict d;
        d["KEEP"] = c[EditKind::kKeep];
        d["DELETE"] = c[EditKind::kDelete];
        d["ADD"] = c[EditKind::kAdd];
        d["STOP"] = c[EditKind::kStop];
        return d;
      },
      py::arg("programs"));

  m.def(
      "sari_sentence",
      [](const Tokens& source, const Tokens& output, const std::vector<Tokens>& refs,
         const std::string& delete_mode, const std::string& empty) {
        return score_dict(metrics::sari_sentence({source, output, refs}, sari_options(delete_mode, empty, "macro")));
      },
      py::arg("source"), py::arg("output"), py::arg("references"), py::arg("delete_mode") = "f1",
      py::arg("empty") = "vacuous");

  m.def(
      "sari",
      [](const std::vector<Tokens>& sources, const std::vector<Tokens>& outputs,
         const std::vector<std::vector<Tokens>>& refs, const std::string& delete_mode,
         const std::string& empty, const std::string& aggregation) {
        if (sources.size() != outputs.size() || sources.size() != refs.size()) {
          throw std::invalid_argument("sources, outputs and references differ in length");
        }
        std::vector<metrics::EvalInstance> inst;
        for (std::size_t i = 0; i < sources.size(); ++i) inst.push_back({sources[i], outputs[i], refs[i]});
        return score_dict(metrics::sari(inst, sari_options(delete_mode, empty, aggregation)));
      },
      py::arg("sources"), py::arg("outputs"), py::arg("references"), py::arg("delete_mode") = "f1",
      py::arg("empty") = "vacuous", py::arg("aggregation") = "macro");

  m.def("fkgl", [](const std::vector<Tokens>& s) { return metrics::fkgl(s); }, py::arg("sentences"));
  m.def("count_syllables", &metrics::count_syllables, py::arg("word"));

  m.def(
      "toy_corpus",
      [](std::size_t pairs, std::uint64_t seed, double drop_adjective, double drop_adverb,
         double swap_verb) {
        ToyCorpusOptions o{pairs, seed, drop_adjective, drop_adverb, swap_verb, false};
        std::vector<py::tuple> out;
        for (const auto& p : make_toy_corpus(o)) {
          out.push_back(py::make_tuple(p.complex.tokens, p.simple.tokens, *p.complex.pos, *p.simple.pos));
        }
        return out;
      },
      py::arg("pairs") = 50, py::arg("seed") = 7, py::arg("drop_adjective") = 1.0,
      py::arg("drop_adverb") = 1.0, py::arg("swap_verb") = 1.0);

  py::class_<LoadedModel>(m, "Simplifier")
      .def(py::init([](const std::filesystem::path& checkpoint, const std::filesystem::path& vocab) {
             return load_for_inference(checkpoint, vocab);
           }),
           py::arg("checkpoint"), py::arg("vocab") = std::filesystem::path())
      .def(
          "simplify",
          [](const LoadedModel& lm, const Tokens& tokens, std::optional<Tokens> tags) {
            Sentence s(tokens, std::move(tags));
            check_sentence(s);
            const auto r = lm.model.infer(s, lm.vocab);
            return py::make_tuple(r.output, to_strings(r.program));
          },
          py::arg("tokens"), py::arg("tags") = std::nullopt);
}
