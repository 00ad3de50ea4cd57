#include "vlmc/word.hpp"

#include <algorithm>
#include <vector>

namespace vlmc {

const char* to_string(NodeClass c) {
  switch (c) {
    case NodeClass::Internal: return "internal";
    case NodeClass::FiniteContext: return "context";
    case NodeClass::ExternalStrict: return "external";
  }
  return "?";
}

bool is_binary(std::string_view w) {
  return std::all_of(w.begin(), w.end(), [](char c) { return c == '0' || c == '1'; });
}

void check_binary(std::string_view w) {
  if (!is_binary(w)) throw BadWord("not a binary word: '" + std::string(w) + "'");
}

Word mirror(std::string_view w) { return Word(w.rbegin(), w.rend()); }

Word shift(std::string_view w) { return w.empty() ? Word() : Word(w.substr(1)); }

Word power(std::string_view w, std::size_t n) {
  Word out;
  out.reserve(w.size() * n);
  for (std::size_t i = 0; i < n; ++i) out.append(w);
  return out;
}

bool is_prefix(std::string_view u, std::string_view w) {
  return u.size() <= w.size() && w.substr(0, u.size()) == u;
}

bool is_suffix(std::string_view u, std::string_view w) {
  return u.size() <= w.size() && w.substr(w.size() - u.size()) == u;
}

std::vector<Word> all_words(std::size_t n) {
  std::vector<Word> out;
  out.reserve(std::size_t{1} << n);
  for (std::size_t x = 0; x < (std::size_t{1} << n); ++x) {
    Word w(n, '0');
    for (std::size_t i = 0; i < n; ++i)
      if (x >> (n - 1 - i) & 1) w[i] = '1';
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace vlmc
