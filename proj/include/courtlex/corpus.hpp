#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace courtlex {

// Thrown when an input file violates its documented format.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

enum class DocumentKind { judgement, gold_transcript, asr_output };

std::string to_string(DocumentKind kind);
DocumentKind document_kind_from_string(std::string_view s);

struct Document {
    std::string id;
    DocumentKind kind = DocumentKind::judgement;
    std::string raw_text;                         // byte-for-byte from source
    std::map<std::string, std::string> metadata;  // case id, date, source path
};

struct Token {
    std::string surface;     // slice of the stream text at char_span
    std::string normalized;  // non-empty
    std::size_t begin = 0;   // byte offsets into TokenStream::text
    std::size_t end = 0;
};

// Half-open token-index range [first, last).
struct TokenRange {
    std::size_t first = 0;
    std::size_t last = 0;
    std::size_t size() const { return last - first; }
};

struct TokenStream {
    std::string document_id;
    std::string text;  // normalized text the token spans index into
    std::vector<Token> tokens;
    std::vector<TokenRange> sentence_bounds;  // partition of the token list

    std::vector<std::string> token_strings() const;
};

// Lowercase, unify apostrophes, collapse whitespace, strip edge punctuation
// except parentheses and intra-token hyphens/periods between alphanumerics.
// Total and idempotent.
std::string normalize_text(std::string_view raw);

// Whitespace split of an already-normalized string. Joining the result with
// single spaces reproduces the input.
std::vector<std::string> tokenize(std::string_view normalized);

// Sentence-split raw text (terminal punctuation, falling back to line
// boundaries), normalize each sentence, and tokenize into one stream.
TokenStream make_stream(std::string document_id, std::string_view raw_text);

// Build a stream directly from pre-tokenized sentences (test and merge support).
TokenStream make_stream_from_sentences(std::string document_id,
                                       const std::vector<std::vector<std::string>>& sentences);

Document ingest_document(const std::string& path, DocumentKind kind);

// Manifest line format: "path<TAB>kind".
std::vector<std::pair<std::string, DocumentKind>> read_manifest(const std::string& path);

}  // namespace courtlex
