#include "courtlex/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

namespace courtlex {

namespace {

std::int64_t count_op(const Alignment& a, EditOp op) {
    std::int64_t c = 0;
    for (const AlignmentOp& o : a.ops)
        if (o.op == op) ++c;
    return c;
}

}  // namespace

std::int64_t Alignment::substitutions() const { return count_op(*this, EditOp::substitution); }
std::int64_t Alignment::deletions() const { return count_op(*this, EditOp::deletion); }
std::int64_t Alignment::insertions() const { return count_op(*this, EditOp::insertion); }
std::int64_t Alignment::matches() const { return count_op(*this, EditOp::match); }

Alignment align(const std::vector<std::string>& reference,
                const std::vector<std::string>& hypothesis) {
    const std::size_t nr = reference.size();
    const std::size_t nh = hypothesis.size();

    // dist[i][j]: minimum edits aligning reference[0,i) to hypothesis[0,j).
    std::vector<std::vector<std::int32_t>> dist(nr + 1, std::vector<std::int32_t>(nh + 1));
    for (std::size_t i = 0; i <= nr; ++i) dist[i][0] = static_cast<std::int32_t>(i);
    for (std::size_t j = 0; j <= nh; ++j) dist[0][j] = static_cast<std::int32_t>(j);
    for (std::size_t i = 1; i <= nr; ++i)
        for (std::size_t j = 1; j <= nh; ++j) {
            std::int32_t diag =
                dist[i - 1][j - 1] + (reference[i - 1] == hypothesis[j - 1] ? 0 : 1);
            std::int32_t up = dist[i - 1][j] + 1;    // deletion
            std::int32_t left = dist[i][j - 1] + 1;  // insertion
            dist[i][j] = std::min({diag, up, left});
        }

    // Deterministic traceback: diagonal > up > left.
    std::vector<AlignmentOp> rev;
    std::size_t i = nr, j = nh;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0) {
            bool eq = reference[i - 1] == hypothesis[j - 1];
            std::int32_t diag = dist[i - 1][j - 1] + (eq ? 0 : 1);
            if (dist[i][j] == diag) {
                rev.push_back({eq ? EditOp::match : EditOp::substitution, i - 1, j - 1});
                --i;
                --j;
                continue;
            }
        }
        if (i > 0 && dist[i][j] == dist[i - 1][j] + 1) {
            rev.push_back({EditOp::deletion, i - 1, SIZE_MAX});
            --i;
            continue;
        }
        rev.push_back({EditOp::insertion, SIZE_MAX, j - 1});
        --j;
    }
    Alignment out;
    out.ops.assign(rev.rbegin(), rev.rend());
    return out;
}

Alignment align(const TokenStream& reference, const TokenStream& hypothesis) {
    return align(reference.token_strings(), hypothesis.token_strings());
}

WerResult wer(const Alignment& alignment, std::int64_t reference_length) {
    if (reference_length <= 0)
        throw std::invalid_argument("wer: reference_length must be positive");
    WerResult r;
    r.substitutions = alignment.substitutions();
    r.deletions = alignment.deletions();
    r.insertions = alignment.insertions();
    r.reference_length = reference_length;
    r.wer = static_cast<double>(r.substitutions + r.deletions + r.insertions) /
            static_cast<double>(reference_length);
    return r;
}

WerResult wer(const TokenStream& reference, const TokenStream& hypothesis) {
    return wer(align(reference, hypothesis),
               static_cast<std::int64_t>(reference.tokens.size()));
}

std::map<EntityCategory, CaptureRatio> entity_capture_ratio(const TokenStream& reference,
                                                            const TokenStream& hypothesis,
                                                            const RuleSet& rules) {
    Alignment a = align(reference, hypothesis);
    std::set<std::size_t> matched;
    for (const AlignmentOp& op : a.ops)
        if (op.op == EditOp::match) matched.insert(op.ref_index);

    std::map<EntityCategory, CaptureRatio> out;
    for (const EntityMention& m : extract_entities(reference, rules)) {
        CaptureRatio& r = out[m.category];
        ++r.total;
        bool captured = true;
        for (std::size_t i = m.token_range.first; i < m.token_range.last && captured; ++i)
            captured = matched.count(i) != 0;
        if (captured) ++r.captured;
    }
    return out;
}

EvalReport build_report(
    const std::vector<TokenStream>& references,
    const std::vector<std::pair<std::string, std::vector<TokenStream>>>& hypothesis_systems,
    const RuleSet& rules) {
    if (references.empty()) throw std::invalid_argument("build_report: no reference files");
    if (hypothesis_systems.empty())
        throw std::invalid_argument("build_report: no hypothesis systems");
    for (const auto& [name, hyps] : hypothesis_systems)
        if (hyps.size() != references.size())
            throw std::invalid_argument("build_report: system '" + name + "' has " +
                                        std::to_string(hyps.size()) + " files, expected " +
                                        std::to_string(references.size()));

    EvalReport report;
    for (const TokenStream& ref : references) report.file_ids.push_back(ref.document_id);

    for (const auto& [name, hyps] : hypothesis_systems) {
        auto start = std::chrono::steady_clock::now();
        SystemEval sys;
        sys.system = name;
        std::int64_t total_edits = 0, total_ref = 0;
        for (std::size_t f = 0; f < references.size(); ++f) {
            WerResult r = wer(references[f], hyps[f]);
            total_edits += r.substitutions + r.deletions + r.insertions;
            total_ref += r.reference_length;
            sys.macro_wer += r.wer;
            sys.per_file.push_back(r);
            for (const auto& [cat, cr] : entity_capture_ratio(references[f], hyps[f], rules)) {
                sys.entity_ratios[cat].captured += cr.captured;
                sys.entity_ratios[cat].total += cr.total;
            }
        }
        sys.macro_wer /= static_cast<double>(references.size());
        sys.micro_wer = static_cast<double>(total_edits) / static_cast<double>(total_ref);
        sys.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                          .count();
        report.systems.push_back(std::move(sys));
    }
    return report;
}

namespace {

std::string fmt(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(4) << v;
    return s.str();
}

void render_table(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths;
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c >= widths.size()) widths.push_back(0);
            widths[c] = std::max(widths[c], row[c].size());
        }
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << "  ";
            out << std::left << std::setw(static_cast<int>(widths[c])) << row[c];
        }
        out << '\n';
    }
}

}  // namespace

std::string render_report(const EvalReport& report, bool include_timing) {
    std::ostringstream out;
    out << "== Word error rate ==\n";
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header = {"System"};
    for (const std::string& id : report.file_ids) header.push_back("WER " + id);
    header.push_back("WER macro");
    header.push_back("WER micro");
    if (include_timing) header.push_back("Time (s)");
    rows.push_back(header);
    for (const SystemEval& sys : report.systems) {
        std::vector<std::string> row = {sys.system};
        for (const WerResult& r : sys.per_file) row.push_back(fmt(r.wer));
        row.push_back(fmt(sys.macro_wer));
        row.push_back(fmt(sys.micro_wer));
        if (include_timing) row.push_back(fmt(sys.seconds));
        rows.push_back(std::move(row));
    }
    render_table(out, rows);

    std::set<EntityCategory> cats;
    for (const SystemEval& sys : report.systems)
        for (const auto& [cat, r] : sys.entity_ratios) cats.insert(cat);
    if (!cats.empty()) {
        out << "\n== Correctly captured entities ==\n";
        rows.clear();
        std::vector<std::string> h2 = {"Entity"};
        for (const SystemEval& sys : report.systems) h2.push_back(sys.system);
        rows.push_back(h2);
        for (EntityCategory cat : cats) {
            std::vector<std::string> row = {to_string(cat)};
            for (const SystemEval& sys : report.systems) {
                auto it = sys.entity_ratios.find(cat);
                row.push_back(it == sys.entity_ratios.end() ? "-" : fmt(it->second.ratio()));
            }
            rows.push_back(std::move(row));
        }
        render_table(out, rows);
    }
    return out.str();
}

std::string render_report_tsv(const EvalReport& report) {
    std::ostringstream out;
    for (const SystemEval& sys : report.systems) {
        for (std::size_t f = 0; f < sys.per_file.size(); ++f)
            out << "wer_" << report.file_ids[f] << '\t' << sys.system << '\t'
                << fmt(sys.per_file[f].wer) << '\n';
        out << "wer_macro\t" << sys.system << '\t' << fmt(sys.macro_wer) << '\n';
        out << "wer_micro\t" << sys.system << '\t' << fmt(sys.micro_wer) << '\n';
        for (const auto& [cat, r] : sys.entity_ratios)
            out << "capture_" << to_string(cat) << '\t' << sys.system << '\t'
                << fmt(r.ratio()) << '\n';
    }
    return out.str();
}

}  // namespace courtlex
