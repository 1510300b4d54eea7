#include "scout/tokenize.hpp"

#include <cctype>

#include "scout/error.hpp"

namespace scout {

namespace {

void check_name(const std::string& name) {
  if (!known_tokenizer(name)) {
    throw Error(ErrorCode::UnknownTokenizer, "no tokenizer named '" + name + "'");
  }
}

}  // namespace

bool known_tokenizer(const std::string& name) {
  return name == "chars4" || name == "whitespace";
}

std::vector<std::string> tokenize(const std::string& text, const std::string& tokenizer) {
  check_name(tokenizer);
  std::vector<std::string> out;
  if (tokenizer == "chars4") {
    out.reserve(text.size() / 4 + 1);
    for (std::size_t i = 0; i < text.size(); i += 4) {
      out.push_back(text.substr(i, 4));
    }
    return out;
  }
  // whitespace
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

std::string detokenize(const std::vector<std::string>& tokens, const std::string& tokenizer) {
  check_name(tokenizer);
  std::string out;
  if (tokenizer == "chars4") {
    for (const auto& t : tokens) out += t;
    return out;
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

long long count_tokens(const std::string& text, const std::string& tokenizer) {
  check_name(tokenizer);
  if (tokenizer == "chars4") {
    return static_cast<long long>((text.size() + 3) / 4);
  }
  return static_cast<long long>(tokenize(text, tokenizer).size());
}

long long estimate_tokens(std::uint64_t byte_size) {
  return static_cast<long long>((byte_size + 3) / 4);
}

}  // namespace scout
