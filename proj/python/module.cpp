// Thin python bindings over the core library. Containers cross the boundary
// as plain lists/tuples/dicts; no python-side state beyond NGramLM handles.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "courtlex/pipeline.hpp"

namespace py = pybind11;
using namespace courtlex;

namespace {

TokenStream stream_from_sentences(const std::vector<std::vector<std::string>>& sentences) {
    return make_stream_from_sentences("py", sentences);
}

SmoothingSpec smoothing_from(const std::string& kind, double param) {
    if (kind == "kneser_ney") return SmoothingSpec::kneser_ney(param);
    if (kind == "add_k") return SmoothingSpec::add_k(param);
    throw std::invalid_argument("smoothing must be 'kneser_ney' or 'add_k'");
}

}  // namespace

PYBIND11_MODULE(_courtlex, m) {
    m.doc() = "Legal-domain ASR adaptation core: normalization, collocations, "
              "entities, n-gram LMs, rescoring, and WER evaluation.";

    m.def("normalize", [](const std::string& text) { return normalize_text(text); },
          py::arg("text"));
    m.def("tokenize",
          [](const std::string& text) { return tokenize(normalize_text(text)); },
          py::arg("text"));

    m.def(
        "wer",
        [](const std::vector<std::string>& reference,
           const std::vector<std::string>& hypothesis) {
            Alignment al = align(reference, hypothesis);
            WerResult r = wer(al, static_cast<std::int64_t>(reference.size()));
            py::dict out;
            out["wer"] = r.wer;
            out["substitutions"] = r.substitutions;
            out["deletions"] = r.deletions;
            out["insertions"] = r.insertions;
            out["reference_length"] = r.reference_length;
            return out;
        },
        py::arg("reference"), py::arg("hypothesis"));

    m.def(
        "detect_phrases",
        [](const std::vector<std::vector<std::string>>& sentences, double delta,
           double threshold, std::int64_t min_count, int passes) {
            CollocationConfig cfg;
            cfg.delta = delta;
            cfg.threshold = threshold;
            cfg.min_count = min_count;
            cfg.passes = passes;
            std::vector<py::tuple> out;
            for (const PhraseEntry& p :
                 detect_phrases({stream_from_sentences(sentences)}, cfg))
                out.push_back(py::make_tuple(p.tokens, p.score, p.frequency));
            return out;
        },
        py::arg("sentences"), py::arg("delta") = 5.0, py::arg("threshold") = 10.0,
        py::arg("min_count") = 5, py::arg("passes") = 2);

    m.def(
        "extract_entities",
        [](const std::string& text) {
            std::vector<py::dict> out;
            for (const EntityMention& e :
                 extract_entities(make_stream("py", text), default_rules())) {
                py::dict d;
                d["category"] = to_string(e.category);
                d["surface"] = e.surface;
                d["first"] = e.token_range.first;
                d["last"] = e.token_range.last;
                out.push_back(d);
            }
            return out;
        },
        py::arg("text"));

    py::class_<NGramLM>(m, "LanguageModel")
        .def_property_readonly("order", &NGramLM::order)
        .def("log_prob", &NGramLM::log_prob, py::arg("tokens"),
             "Natural-log probability of the token sequence including </s>.")
        .def("in_vocab", &NGramLM::in_vocab, py::arg("word"))
        .def(
            "perplexity",
            [](const NGramLM& lm, const std::vector<std::vector<std::string>>& sentences) {
                return perplexity(lm, {stream_from_sentences(sentences)});
            },
            py::arg("sentences"))
        .def("save", [](const NGramLM& lm, const std::string& path) { save_lm(lm, path); },
             py::arg("path"))
        .def_static("load", [](const std::string& path) { return load_lm(path); },
                    py::arg("path"))
        .def_static(
            "train",
            [](const std::vector<std::vector<std::string>>& sentences, int order,
               const std::string& smoothing, double param, int unk_threshold) {
                return train_lm({stream_from_sentences(sentences)}, order,
                                smoothing_from(smoothing, param), unk_threshold);
            },
            py::arg("sentences"), py::arg("order") = 3,
            py::arg("smoothing") = "kneser_ney", py::arg("param") = 0.75,
            py::arg("unk_threshold") = 1);

    m.def(
        "simulate_asr",
        [](const std::vector<std::string>& reference, double substitution_rate,
           double deletion_rate, double insertion_rate, double split_rate,
           double merge_rate, std::uint64_t seed, int n,
           const std::vector<std::string>& vocabulary) {
            ErrorModel model{substitution_rate, deletion_rate, insertion_rate,
                             split_rate,        merge_rate,    seed};
            NBestList out = simulate_asr(make_stream_from_sentences("py", {reference}),
                                         model, n, vocabulary);
            std::vector<py::tuple> hyps;
            for (const Hypothesis& h : out.hypotheses)
                hyps.push_back(py::make_tuple(h.tokens, h.asr_logscore));
            return hyps;
        },
        py::arg("reference"), py::arg("substitution_rate") = 0.04,
        py::arg("deletion_rate") = 0.01, py::arg("insertion_rate") = 0.01,
        py::arg("split_rate") = 0.02, py::arg("merge_rate") = 0.02, py::arg("seed") = 0,
        py::arg("n") = 5, py::arg("vocabulary") = std::vector<std::string>{});

    m.def(
        "rescore",
        [](const std::vector<std::pair<std::vector<std::string>, double>>& hypotheses,
           const NGramLM& lm, const std::vector<std::vector<std::string>>& vocab_phrases,
           double lambda, double beta, bool length_norm) {
            NBestList nbest;
            nbest.utterance_id = "py";
            for (const auto& [tokens, score] : hypotheses)
                nbest.hypotheses.push_back({tokens, score});
            VocabularyList vocab;
            for (const auto& phrase : vocab_phrases) {
                VocabularyEntry e;
                e.phrase = phrase;
                e.display_as = e.phrase_key();
                vocab.entries.push_back(std::move(e));
            }
            RescoreWeights w{lambda, beta, length_norm};
            return rescore(nbest, lm, vocab, w).tokens;
        },
        py::arg("hypotheses"), py::arg("lm"),
        py::arg("vocab_phrases") = std::vector<std::vector<std::string>>{},
        py::arg("lambda_") = 0.5, py::arg("beta") = 0.5, py::arg("length_norm") = true);
}
