#include "scout/document_env.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <fstream>
#include <mutex>

#include <boost/regex.hpp>

#include "scout/error.hpp"
#include "scout/tokenize.hpp"

namespace scout {

namespace {

boost::regex compile_pattern(const std::string& pattern, bool case_insensitive) {
  boost::regex::flag_type flags = boost::regex::extended;
  if (case_insensitive) flags = flags | boost::regex::icase;
  try {
    return boost::regex(pattern, flags);
  } catch (const boost::regex_error& e) {
    throw Error(ErrorCode::InvalidPattern,
                "cannot compile '" + pattern + "': " + e.what());
  }
}

std::string canonical_or_absolute(const std::filesystem::path& path) {
  std::error_code ec;
  auto canon = std::filesystem::weakly_canonical(path, ec);
  if (ec) canon = std::filesystem::absolute(path);
  return canon.string();
}

}  // namespace

// ============================================================================
// Anchor
// ============================================================================

std::string Anchor::to_string() const {
  return doc.value + ":" + std::to_string(start_line) + "-" + std::to_string(end_line);
}

Anchor Anchor::parse(const std::string& serialized) {
  // "doc_id:start-end"; the doc id may itself contain ':' so split on the
  // last colon. A bare "start-end" (no colon) leaves the doc id empty for the
  // caller to default.
  auto colon = serialized.rfind(':');
  std::string doc = colon == std::string::npos ? "" : serialized.substr(0, colon);
  std::string range = colon == std::string::npos ? serialized : serialized.substr(colon + 1);
  auto dash = range.find('-');
  try {
    Anchor a;
    a.doc.value = doc;
    if (dash == std::string::npos) {
      a.start_line = std::stol(range);
      a.end_line = a.start_line;
    } else {
      a.start_line = std::stol(range.substr(0, dash));
      a.end_line = std::stol(range.substr(dash + 1));
    }
    if (a.start_line < 1 || a.end_line < a.start_line) {
      throw Error(ErrorCode::AnchorOutOfRange, "bad range in anchor '" + serialized + "'");
    }
    return a;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error(ErrorCode::AnchorOutOfRange, "cannot parse anchor '" + serialized + "'");
  }
}

// ============================================================================
// DocumentEnv
// ============================================================================

DocumentEnv::DocumentEnv(EnvConfig config) : config_(std::move(config)) {}

DocumentHandle DocumentEnv::register_document(const std::filesystem::path& path) {
  std::unique_lock lock(mutex_);

  std::string canon = canonical_or_absolute(path);
  if (auto it = by_path_.find(canon); it != by_path_.end()) {
    return docs_.at(it->second).handle;
  }

  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::NotFound, "cannot open '" + path.string() + "'");
  }
  std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (raw.find('\0') != std::string::npos) {
    throw Error(ErrorCode::InvalidDocument,
                "'" + path.string() + "' contains NUL bytes; not a text document");
  }

  Doc d;
  d.trailing_newline = !raw.empty() && raw.back() == '\n';
  std::size_t pos = 0;
  while (pos < raw.size()) {
    std::size_t nl = raw.find('\n', pos);
    if (nl == std::string::npos) {
      d.lines.push_back(raw.substr(pos));
      break;
    }
    d.lines.push_back(raw.substr(pos, nl - pos));
    pos = nl + 1;
  }
  for (const auto& line : d.lines) {
    d.max_line_length = std::max(d.max_line_length, static_cast<long>(line.size()));
  }

  // Basename as the id; disambiguate collisions between distinct paths.
  std::string id = path.filename().string();
  std::string candidate = id;
  int suffix = 1;
  while (docs_.count(candidate)) {
    candidate = id + "~" + std::to_string(++suffix);
  }
  id = candidate;

  d.handle.id = DocumentId{id};
  d.handle.path = canon;
  d.handle.byte_size = raw.size();
  d.handle.line_count = static_cast<long>(d.lines.size());
  d.handle.estimated_tokens = estimate_tokens(raw.size());

  by_path_[canon] = id;
  auto [it, inserted] = docs_.emplace(id, std::move(d));
  (void)inserted;
  return it->second.handle;
}

const DocumentEnv::Doc& DocumentEnv::find(const DocumentId& doc) const {
  auto it = docs_.find(doc.value);
  if (it == docs_.end()) {
    throw Error(ErrorCode::NotFound, "no document registered as '" + doc.value + "'");
  }
  return it->second;
}

const DocumentHandle& DocumentEnv::handle(const DocumentId& doc) const {
  std::shared_lock lock(mutex_);
  return find(doc).handle;
}

bool DocumentEnv::registered(const DocumentId& doc) const {
  std::shared_lock lock(mutex_);
  return docs_.count(doc.value) > 0;
}

std::vector<DocumentId> DocumentEnv::documents() const {
  std::shared_lock lock(mutex_);
  std::vector<const Doc*> all;
  all.reserve(docs_.size());
  for (const auto& [id, d] : docs_) all.push_back(&d);
  std::sort(all.begin(), all.end(), [](const Doc* a, const Doc* b) {
    return a->handle.path.string() < b->handle.path.string();
  });
  std::vector<DocumentId> out;
  out.reserve(all.size());
  for (const Doc* d : all) out.push_back(d->handle.id);
  return out;
}

FileInfo DocumentEnv::info_of(const Doc& d) const {
  FileInfo info;
  info.byte_size = d.handle.byte_size;
  info.estimated_tokens = d.handle.estimated_tokens;
  info.needs_normalization = d.max_line_length > config_.normalization_threshold;
  return info;
}

FileInfo DocumentEnv::get_file_info(const DocumentId& doc) const {
  std::shared_lock lock(mutex_);
  return info_of(find(doc));
}

std::vector<DocumentId> DocumentEnv::glob(const std::string& pattern,
                                          const std::optional<std::string>& scope) const {
  if (pattern.empty()) {
    throw Error(ErrorCode::InvalidPattern, "glob pattern is empty");
  }
  std::optional<std::string> scope_prefix;
  if (scope) {
    scope_prefix = canonical_or_absolute(*scope);
    if (!scope_prefix->empty() && scope_prefix->back() != '/') *scope_prefix += '/';
  }

  std::shared_lock lock(mutex_);
  std::vector<const Doc*> matched;
  for (const auto& [id, d] : docs_) {
    std::string path = d.handle.path.string();
    if (scope_prefix && path.rfind(*scope_prefix, 0) != 0) continue;
    std::string base = d.handle.path.filename().string();
    if (::fnmatch(pattern.c_str(), base.c_str(), 0) == 0) matched.push_back(&d);
  }
  std::sort(matched.begin(), matched.end(), [](const Doc* a, const Doc* b) {
    return a->handle.path.string() < b->handle.path.string();
  });
  std::vector<DocumentId> out;
  out.reserve(matched.size());
  for (const Doc* d : matched) out.push_back(d->handle.id);
  return out;
}

GrepResult DocumentEnv::grep(const DocumentId& doc, const std::string& pattern,
                             const GrepOptions& options) const {
  boost::regex re = compile_pattern(pattern, options.case_insensitive);

  std::shared_lock lock(mutex_);
  const Doc& d = find(doc);

  GrepResult result;
  long long budget = config_.observation_budget;
  long long used_tokens = 0;
  const long n = static_cast<long>(d.lines.size());
  for (long i = 0; i < n; ++i) {
    boost::smatch m;
    if (!boost::regex_search(d.lines[i], m, re)) continue;

    if (options.max_matches > 0 &&
        static_cast<long>(result.snippets.size()) >= options.max_matches) {
      result.truncated = true;  // at least one further match exists
      break;
    }

    MatchSnippet snippet;
    snippet.anchor = Anchor{doc, i + 1, i + 1, d.revision};
    snippet.line = d.lines[i];
    snippet.matched_text = m[0].str();

    long long snippet_tokens = count_tokens(d.lines[i], config_.tokenizer);
    for (long c = std::max(0L, i - options.context); c < i; ++c) {
      snippet.context_before.push_back(d.lines[c]);
      snippet_tokens += count_tokens(d.lines[c], config_.tokenizer);
    }
    for (long c = i + 1; c <= std::min(n - 1, i + options.context); ++c) {
      snippet.context_after.push_back(d.lines[c]);
      snippet_tokens += count_tokens(d.lines[c], config_.tokenizer);
    }

    if (used_tokens + snippet_tokens > budget) {
      result.truncated = true;
      if (result.snippets.empty()) result.snippets.push_back(std::move(snippet));
      break;
    }
    used_tokens += snippet_tokens;
    result.snippets.push_back(std::move(snippet));
  }
  return result;
}

ScanResult DocumentEnv::scan(const DocumentId& doc, const std::string& pattern,
                             const std::optional<LineRange>& scope) const {
  if (pattern.empty()) {
    throw Error(ErrorCode::InvalidPattern, "scan pattern is empty");
  }
  // Structural skimming is always case-insensitive: headings vary in casing.
  boost::regex re = compile_pattern(pattern, /*case_insensitive=*/true);

  std::shared_lock lock(mutex_);
  const Doc& d = find(doc);

  const long n = static_cast<long>(d.lines.size());
  long first = 1, last = n;
  if (scope) {
    first = std::max(1L, scope->start);
    last = scope->end > 0 ? std::min(n, scope->end) : n;
  }

  ScanResult result;
  for (long i = first; i <= last; ++i) {
    if (!boost::regex_search(d.lines[i - 1], re)) continue;
    if (static_cast<long>(result.anchors.size()) >= config_.scan_max_matches) {
      result.truncated = true;
      break;
    }
    result.anchors.push_back(Anchor{doc, i, i, d.revision});
  }
  return result;
}

Observation DocumentEnv::read(const Anchor& anchor, std::optional<long> limit) const {
  std::shared_lock lock(mutex_);
  const Doc& d = find(anchor.doc);

  if (anchor.revision && *anchor.revision != d.revision) {
    throw Error(ErrorCode::AnchorOutOfRange,
                "anchor " + anchor.to_string() + " predates document normalization");
  }
  const long n = d.handle.line_count;
  if (anchor.start_line < 1 || anchor.start_line > anchor.end_line || anchor.end_line > n) {
    throw Error(ErrorCode::AnchorOutOfRange,
                "anchor " + anchor.to_string() + " outside document (" +
                    std::to_string(n) + " lines)");
  }
  if (limit && *limit < 1) {
    throw Error(ErrorCode::AnchorOutOfRange, "read limit must be >= 1");
  }

  long last = anchor.end_line;
  if (limit) last = std::min(last, anchor.start_line + *limit - 1);
  bool truncated = last < anchor.end_line;

  // Cut back further if the span exceeds the observation budget, keeping
  // whole lines where possible.
  long long budget = config_.observation_budget;
  std::string text;
  long included_last = anchor.start_line - 1;
  for (long i = anchor.start_line; i <= last; ++i) {
    const std::string& line = d.lines[i - 1];
    std::string candidate = text;
    if (i > anchor.start_line) candidate += '\n';
    candidate += line;
    if (count_tokens(candidate, config_.tokenizer) > budget) {
      if (text.empty()) {
        // Single over-budget line: return a character prefix.
        text = line.substr(0, static_cast<std::size_t>(budget) * 4);
        included_last = i;
      }
      truncated = true;
      break;
    }
    text = std::move(candidate);
    included_last = i;
  }

  Observation obs;
  obs.text = std::move(text);
  obs.anchor = Anchor{anchor.doc, anchor.start_line, std::max(included_last, anchor.start_line),
                      d.revision};
  obs.truncated = truncated;
  return obs;
}

FileInfo DocumentEnv::normalize_document(const DocumentId& doc, long max_length) {
  std::unique_lock lock(mutex_);
  auto it = docs_.find(doc.value);
  if (it == docs_.end()) {
    throw Error(ErrorCode::NotFound, "no document registered as '" + doc.value + "'");
  }
  Doc& d = it->second;
  long cap = max_length > 0 ? max_length : config_.normalization_threshold;

  bool changed = false;
  std::vector<std::string> lines;
  lines.reserve(d.lines.size());
  for (const auto& line : d.lines) {
    if (static_cast<long>(line.size()) <= cap) {
      lines.push_back(line);
      continue;
    }
    changed = true;
    for (std::size_t pos = 0; pos < line.size(); pos += cap) {
      lines.push_back(line.substr(pos, cap));
    }
  }

  if (changed) {
    d.lines = std::move(lines);
    d.revision++;
    d.handle.normalized = true;
    d.handle.line_count = static_cast<long>(d.lines.size());
    std::uint64_t bytes = 0;
    d.max_line_length = 0;
    for (const auto& line : d.lines) {
      bytes += line.size();
      d.max_line_length = std::max(d.max_line_length, static_cast<long>(line.size()));
    }
    if (!d.lines.empty()) bytes += d.lines.size() - 1;  // separators
    if (d.trailing_newline) bytes += 1;
    d.handle.byte_size = bytes;
    d.handle.estimated_tokens = estimate_tokens(bytes);
  }
  return info_of(d);
}

}  // namespace scout
