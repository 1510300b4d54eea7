#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace scout {

// Opaque, stable identifier for a registered document. Registering the same
// path twice yields the same id; ids are unique within one environment.
struct DocumentId {
  std::string value;

  bool operator==(const DocumentId& other) const = default;
  auto operator<=>(const DocumentId& other) const = default;
};

// A provenance pointer: document id plus a 1-based inclusive line range.
// Anchors serialize as "doc_id:start-end". Anchors minted by the environment
// carry the document revision they were created against; after
// normalize_document rewrites a document, stale anchors fail to resolve.
// Anchors parsed from their serialized form carry no revision and are
// validated by range only.
struct Anchor {
  DocumentId doc;
  long start_line = 1;  // 1-based, inclusive
  long end_line = 1;    // inclusive
  std::optional<unsigned> revision;

  std::string to_string() const;
  static Anchor parse(const std::string& serialized);

  // Equality of the referenced span (ignores revision).
  bool same_span(const Anchor& other) const {
    return doc == other.doc && start_line == other.start_line &&
           end_line == other.end_line;
  }
};

struct DocumentHandle {
  DocumentId id;
  std::filesystem::path path;
  std::uint64_t byte_size = 0;
  long line_count = 0;
  long long estimated_tokens = 0;
  bool normalized = false;
};

struct FileInfo {
  std::uint64_t byte_size = 0;
  long long estimated_tokens = 0;
  bool needs_normalization = false;
};

struct MatchSnippet {
  Anchor anchor;             // the line containing the match
  std::string line;          // that line's full text
  std::string matched_text;  // the first matched substring within it
  std::vector<std::string> context_before;
  std::vector<std::string> context_after;
};

// A contiguous local observation grounded at an anchor. `text` is byte-equal
// to the span named by `anchor` unless `truncated` is set, in which case it is
// a prefix of that span (cut by the observation budget).
struct Observation {
  std::string text;
  Anchor anchor;
  bool truncated = false;
};

struct GrepOptions {
  long context = 0;             // lines of context either side of a match
  bool case_insensitive = false;
  long max_matches = 20;
};

// `truncated` signals that the result set was cut, either by max_matches or
// by the observation budget.
struct GrepResult {
  std::vector<MatchSnippet> snippets;
  bool truncated = false;
};

struct LineRange {
  long start = 1;
  long end = 0;  // inclusive; 0 = end of document
};

struct ScanResult {
  std::vector<Anchor> anchors;
  bool truncated = false;
};

struct EnvConfig {
  long long observation_budget = 4000;  // tokens per tool result
  long normalization_threshold = 4000;  // chars per line
  long scan_max_matches = 50;
  std::string tokenizer = "chars4";
};

// Read-only, anchor-producing access layer over raw text documents.
//
// Documents are plain UTF-8 text files, one document per file, ingested as-is
// (no indexing, no chunking). After registration the environment never
// mutates document content, with the single exception of normalize_document,
// which rewrites the in-memory working copy (the file on disk is untouched)
// and must be serialized externally before concurrent use. All read
// operations are safe to call concurrently.
class DocumentEnv {
 public:
  explicit DocumentEnv(EnvConfig config = {});

  // Registers `path` and computes metadata. Re-registering the same path
  // returns the existing handle. Missing file -> NotFound; binary content ->
  // InvalidDocument.
  DocumentHandle register_document(const std::filesystem::path& path);

  const DocumentHandle& handle(const DocumentId& doc) const;
  bool registered(const DocumentId& doc) const;

  // Registered ids in lexicographic path order.
  std::vector<DocumentId> documents() const;

  // Metadata only; never loads content into the caller's context.
  FileInfo get_file_info(const DocumentId& doc) const;

  // Shell-style filename matching against registered document basenames
  // (e.g. "doc_?.txt"); `scope` restricts to documents under that directory.
  // Results in lexicographic path order. Empty pattern -> InvalidPattern.
  std::vector<DocumentId> glob(const std::string& pattern,
                               const std::optional<std::string>& scope = {}) const;

  // Line-by-line regex search (POSIX-extended dialect). One snippet per
  // matching line (first match on the line), in ascending line order.
  GrepResult grep(const DocumentId& doc, const std::string& pattern,
                  const GrepOptions& options = {}) const;

  // Structural skim: anchors of lines matching `pattern` (always
  // case-insensitive), locations only, never body text.
  ScanResult scan(const DocumentId& doc, const std::string& pattern,
                  const std::optional<LineRange>& scope = {}) const;

  // Exact lines [start_line, min(end_line, start_line+limit-1)], joined with
  // '\n'. The returned anchor names the span actually included.
  Observation read(const Anchor& anchor, std::optional<long> limit = {}) const;

  // Splits any line longer than `max_length` (0 = configured threshold) into
  // chunks of at most that many characters. Content is preserved modulo the
  // inserted newlines. Rewriting bumps the document revision, invalidating
  // previously minted anchors.
  FileInfo normalize_document(const DocumentId& doc, long max_length = 0);

  const EnvConfig& config() const { return config_; }

 private:
  struct Doc {
    DocumentHandle handle;
    std::vector<std::string> lines;
    bool trailing_newline = false;
    long max_line_length = 0;
    unsigned revision = 0;
  };

  const Doc& find(const DocumentId& doc) const;
  FileInfo info_of(const Doc& d) const;

  EnvConfig config_;
  std::map<std::string, Doc> docs_;             // id -> doc
  std::map<std::string, std::string> by_path_;  // canonical path -> id
  mutable std::shared_mutex mutex_;
};

}  // namespace scout
