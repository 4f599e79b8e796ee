#include "courtlex/corpus.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace courtlex {

// Defined in rescore.cpp; used to reject malformed ASR JSON at ingest time.
void validate_asr_json_text(const std::string& text);

std::string to_string(DocumentKind kind) {
    switch (kind) {
        case DocumentKind::judgement: return "judgement";
        case DocumentKind::gold_transcript: return "gold_transcript";
        case DocumentKind::asr_output: return "asr_output";
    }
    return "judgement";
}

DocumentKind document_kind_from_string(std::string_view s) {
    if (s == "judgement") return DocumentKind::judgement;
    if (s == "gold_transcript") return DocumentKind::gold_transcript;
    if (s == "asr_output") return DocumentKind::asr_output;
    throw FormatError("unknown document kind: '" + std::string(s) + "'");
}

std::vector<std::string> TokenStream::token_strings() const {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(t.normalized);
    return out;
}

namespace {

bool is_alnum(unsigned char c) { return std::isalnum(c) != 0; }

// Map curly quotes and dashes to ASCII so edge stripping sees single bytes.
std::string fold_punct(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size();) {
        unsigned char c = static_cast<unsigned char>(raw[i]);
        if (c == 0xE2 && i + 2 < raw.size()) {
            unsigned char b1 = static_cast<unsigned char>(raw[i + 1]);
            unsigned char b2 = static_cast<unsigned char>(raw[i + 2]);
            if (b1 == 0x80) {
                if (b2 == 0x98 || b2 == 0x99) {  // curly apostrophes
                    out.push_back('\'');
                    i += 3;
                    continue;
                }
                if (b2 == 0x9C || b2 == 0x9D) {  // curly double quotes
                    out.push_back('"');
                    i += 3;
                    continue;
                }
                if (b2 == 0x93 || b2 == 0x94) {  // en/em dash
                    out.push_back('-');
                    i += 3;
                    continue;
                }
                if (b2 == 0xA6) {  // ellipsis
                    out.push_back('.');
                    i += 3;
                    continue;
                }
            }
        }
        out.push_back(static_cast<char>(c));
        ++i;
    }
    return out;
}

// Strip punctuation from token edges. Parentheses always survive; hyphens
// and periods survive only between alphanumerics (which makes them interior,
// so edge stripping removes them unconditionally at the edges).
std::string strip_token(const std::string& tok) {
    std::size_t b = 0;
    std::size_t e = tok.size();
    auto strippable = [](unsigned char c) {
        return !is_alnum(c) && c != '(' && c != ')' && static_cast<unsigned char>(c) < 0x80;
    };
    while (b < e && strippable(static_cast<unsigned char>(tok[b]))) ++b;
    while (e > b && strippable(static_cast<unsigned char>(tok[e - 1]))) --e;
    std::string core = tok.substr(b, e - b);
    bool has_alnum = false;
    for (unsigned char c : core)
        if (is_alnum(c) || c >= 0x80) has_alnum = true;
    if (!has_alnum) return "";
    return core;
}

}  // namespace

std::string normalize_text(std::string_view raw) {
    std::string folded = fold_punct(raw);
    for (char& c : folded)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

    std::string out;
    out.reserve(folded.size());
    std::string tok;
    auto flush = [&] {
        if (tok.empty()) return;
        std::string kept = strip_token(tok);
        tok.clear();
        if (kept.empty()) return;
        if (!out.empty()) out.push_back(' ');
        out += kept;
    };
    for (unsigned char c : folded) {
        if (std::isspace(c))
            flush();
        else
            tok.push_back(static_cast<char>(c));
    }
    flush();
    return out;
}

std::vector<std::string> tokenize(std::string_view normalized) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < normalized.size()) {
        std::size_t j = normalized.find(' ', i);
        if (j == std::string_view::npos) j = normalized.size();
        if (j > i) out.emplace_back(normalized.substr(i, j - i));
        i = j + 1;
    }
    return out;
}

namespace {

// Split raw text into sentence chunks. Terminal punctuation followed by
// whitespace ends a sentence; text without any terminal punctuation falls
// back to line boundaries.
std::vector<std::string> split_sentences_raw(std::string_view raw) {
    std::vector<std::string> sentences;
    std::string cur;
    bool saw_terminal = false;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        char c = raw[i];
        cur.push_back(c);
        if ((c == '.' || c == '?' || c == '!') &&
            (i + 1 == raw.size() || std::isspace(static_cast<unsigned char>(raw[i + 1])))) {
            // "3.17" keeps its period because the next char is not whitespace.
            sentences.push_back(cur);
            cur.clear();
            saw_terminal = true;
        }
    }
    if (!cur.empty()) sentences.push_back(cur);
    if (!saw_terminal) {
        // Line-boundary fallback for punctuation-free transcripts.
        sentences.clear();
        std::string line;
        std::istringstream in{std::string(raw)};
        while (std::getline(in, line))
            if (!line.empty()) sentences.push_back(line);
    }
    return sentences;
}

}  // namespace

TokenStream make_stream(std::string document_id, std::string_view raw_text) {
    TokenStream stream;
    stream.document_id = std::move(document_id);
    for (const std::string& sent_raw : split_sentences_raw(raw_text)) {
        std::string norm = normalize_text(sent_raw);
        std::vector<std::string> toks = tokenize(norm);
        if (toks.empty()) continue;
        std::size_t first = stream.tokens.size();
        for (const std::string& t : toks) {
            if (!stream.text.empty()) stream.text.push_back(' ');
            Token token;
            token.begin = stream.text.size();
            stream.text += t;
            token.end = stream.text.size();
            token.surface = t;
            token.normalized = t;
            stream.tokens.push_back(std::move(token));
        }
        stream.sentence_bounds.push_back({first, stream.tokens.size()});
    }
    return stream;
}

TokenStream make_stream_from_sentences(std::string document_id,
                                       const std::vector<std::vector<std::string>>& sentences) {
    TokenStream stream;
    stream.document_id = std::move(document_id);
    for (const auto& sent : sentences) {
        if (sent.empty()) continue;
        std::size_t first = stream.tokens.size();
        for (const std::string& t : sent) {
            if (!stream.text.empty()) stream.text.push_back(' ');
            Token token;
            token.begin = stream.text.size();
            stream.text += t;
            token.end = stream.text.size();
            token.surface = t;
            token.normalized = t;
            stream.tokens.push_back(std::move(token));
        }
        stream.sentence_bounds.push_back({first, stream.tokens.size()});
    }
    return stream;
}

Document ingest_document(const std::string& path, DocumentKind kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();

    Document doc;
    doc.raw_text = buf.str();
    doc.kind = kind;
    // Basename without extension as the document id.
    std::size_t slash = path.find_last_of("/\\");
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    std::size_t dot = base.find_last_of('.');
    doc.id = dot == std::string::npos ? base : base.substr(0, dot);
    doc.metadata["source_path"] = path;

    if (kind == DocumentKind::asr_output) validate_asr_json_text(doc.raw_text);
    return doc;
}

std::vector<std::pair<std::string, DocumentKind>> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read manifest: " + path);
    std::vector<std::pair<std::string, DocumentKind>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw FormatError("manifest line " + std::to_string(lineno) +
                              ": expected 'path<TAB>kind'");
        out.emplace_back(line.substr(0, tab), document_kind_from_string(line.substr(tab + 1)));
    }
    return out;
}

}  // namespace courtlex
