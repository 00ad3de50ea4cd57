#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vlmc {

/// Finite binary word, letters are the chars '0' and '1'.
/// Tree-side words are read left to right as labels in a context tree,
/// so the first letter is the most recent one of a history.
using Word = std::string;

enum class NodeClass { Internal, FiniteContext, ExternalStrict };

const char* to_string(NodeClass c);

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BadWord : Error { using Error::Error; };
struct InvalidTree : Error { using Error::Error; };
struct HistoryTooShort : Error { using Error::Error; };
struct EmptyWord : Error { using Error::Error; };
struct NotAnAlis : Error { using Error::Error; };
struct TreeNotStable : Error { using Error::Error; };
struct BadParams : Error { using Error::Error; };
struct NotNonNull : Error { using Error::Error; };
struct CascadeDiverged : Error { using Error::Error; };
struct DidNotConverge : Error { using Error::Error; };
struct BudgetExceeded : Error { using Error::Error; };
struct TrajectoryTooShort : Error { using Error::Error; };

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

bool is_binary(std::string_view w);
/// throws BadWord unless w only holds '0'/'1'
void check_binary(std::string_view w);

Word mirror(std::string_view w);
/// drops the first letter, shift(empty) = empty
Word shift(std::string_view w);
Word power(std::string_view w, std::size_t n);
bool is_prefix(std::string_view u, std::string_view w);
bool is_suffix(std::string_view u, std::string_view w);

inline int letter_index(char c) { return c == '1' ? 1 : 0; }
inline char letter_char(int a) { return a ? '1' : '0'; }

/// all words of length n in lexicographic order
std::vector<Word> all_words(std::size_t n);

/// ordering on alis sets and context lists: shorter first, then lexicographic
inline bool length_lex_less(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

}  // namespace vlmc
