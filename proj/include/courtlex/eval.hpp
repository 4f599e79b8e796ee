#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "courtlex/corpus.hpp"
#include "courtlex/entities.hpp"

namespace courtlex {

enum class EditOp { match, substitution, deletion, insertion };

struct AlignmentOp {
    EditOp op;
    // Indices into the reference/hypothesis token lists; SIZE_MAX when the
    // side does not participate (insertions/deletions).
    std::size_t ref_index;
    std::size_t hyp_index;
};

struct Alignment {
    std::vector<AlignmentOp> ops;

    std::int64_t substitutions() const;
    std::int64_t deletions() const;
    std::int64_t insertions() const;
    std::int64_t matches() const;
    std::int64_t edits() const { return substitutions() + deletions() + insertions(); }
};

struct WerResult {
    std::int64_t substitutions = 0;
    std::int64_t deletions = 0;
    std::int64_t insertions = 0;
    std::int64_t reference_length = 0;
    double wer = 0.0;
};

// Minimum-edit alignment with deterministic traceback (diagonal > up > left).
Alignment align(const std::vector<std::string>& reference,
                const std::vector<std::string>& hypothesis);
Alignment align(const TokenStream& reference, const TokenStream& hypothesis);

// Throws std::invalid_argument when reference_length == 0.
WerResult wer(const Alignment& alignment, std::int64_t reference_length);
WerResult wer(const TokenStream& reference, const TokenStream& hypothesis);

// Per-category captured/total over reference mentions; a mention is captured
// iff every token in its range is a match op. Categories without reference
// mentions are omitted.
struct CaptureRatio {
    std::int64_t captured = 0;
    std::int64_t total = 0;
    double ratio() const { return total ? static_cast<double>(captured) / total : 0.0; }
};
std::map<EntityCategory, CaptureRatio> entity_capture_ratio(const TokenStream& reference,
                                                            const TokenStream& hypothesis,
                                                            const RuleSet& rules);

struct SystemEval {
    std::string system;
    std::vector<WerResult> per_file;
    double macro_wer = 0.0;  // mean of per-file WERs
    double micro_wer = 0.0;  // token-weighted: total edits / total reference tokens
    std::map<EntityCategory, CaptureRatio> entity_ratios;  // micro, mention-weighted
    double seconds = 0.0;    // wall-clock evaluation time
};

struct EvalReport {
    std::vector<std::string> file_ids;
    std::vector<SystemEval> systems;
};

// One hypothesis stream per reference per system; throws on empty input.
EvalReport build_report(const std::vector<TokenStream>& references,
                        const std::vector<std::pair<std::string, std::vector<TokenStream>>>&
                            hypothesis_systems,
                        const RuleSet& rules);

// Aligned text tables in the shape of a WER table and an entity-ratio table.
std::string render_report(const EvalReport& report, bool include_timing = true);
// Machine-readable "metric<TAB>system<TAB>value" lines (no timing rows).
std::string render_report_tsv(const EvalReport& report);

}  // namespace courtlex
