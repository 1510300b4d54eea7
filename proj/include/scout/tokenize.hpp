#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace scout {

// Deterministic tokenizers used for budgeting and truncation.
//
//   "chars4"     fixed 4-character chunks. Counting is ceil(len/4) and
//                detokenize is exact concatenation, so truncation round-trips
//                byte-exactly. This is the default estimator everywhere.
//   "whitespace" splits on runs of whitespace; detokenize joins with single
//                spaces (normalizes internal whitespace).
//
// Unknown names raise Error(UnknownTokenizer).
std::vector<std::string> tokenize(const std::string& text,
                                  const std::string& tokenizer = "chars4");

std::string detokenize(const std::vector<std::string>& tokens,
                       const std::string& tokenizer = "chars4");

long long count_tokens(const std::string& text,
                       const std::string& tokenizer = "chars4");

bool known_tokenizer(const std::string& name);

// ceil(bytes / 4): the size -> token estimate used in file metadata.
long long estimate_tokens(std::uint64_t byte_size);

}  // namespace scout
