#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pcfgeo {

using Letter = std::uint8_t;
using Word = std::vector<Letter>;

// Largest alphabet the text syntax for words can express (digits 0-9, a-z).
inline constexpr int kMaxLetters = 36;

// The point psi_w(p_label) of V_{|w|}.
struct VertexRef {
  Word word;
  int label = 0;

  int level() const { return static_cast<int>(word.size()); }

  friend bool operator==(const VertexRef&, const VertexRef&) = default;
  friend auto operator<=>(const VertexRef&, const VertexRef&) = default;
};

// psi_{letter_a}(p_{label_a}) = psi_{letter_b}(p_{label_b}).
struct GlueRule {
  int letter_a = 0;
  int label_a = 0;
  int letter_b = 0;
  int label_b = 0;

  friend bool operator==(const GlueRule&, const GlueRule&) = default;
};

// Combinatorial description of a p.c.f. self-similar structure whose
// boundary points are all fixed points of some contraction.
struct FractalSpec {
  std::string name;
  int letter_count = 0;           // k = #S
  int boundary_count = 0;         // q = #V_0
  std::vector<int> fixed_letter;  // boundary label -> letter fixing it
  std::vector<GlueRule> glue;

  friend bool operator==(const FractalSpec&, const FractalSpec&) = default;
};

// Throws Error(validation) naming the offending field or glue entry.
void validate(const FractalSpec& spec);

// Throws Error(invalid_argument) when a letter or the label is out of range.
void check_ref(const FractalSpec& spec, const VertexRef& ref);

// Boundary label fixed by letter, or -1 when the letter fixes no boundary point.
int fixed_label_of_letter(const FractalSpec& spec, int letter);

// Lexicographically smallest address of the same point at the same level.
VertexRef canonicalize(const FractalSpec& spec, const VertexRef& ref);

// Appends fixed_letter(label) until the word has length n.
VertexRef lift(const FractalSpec& spec, const VertexRef& ref, int n);

// Canonical address of the point at the smallest level m with the point in V_m.
VertexRef minimal_ref(const FractalSpec& spec, const VertexRef& ref);

// All addresses of the point at the level of ref, sorted.
std::vector<VertexRef> address_orbit(const FractalSpec& spec, const VertexRef& ref);

// Text syntax "word:label"; word is a digit string (0-9 then a-z), "-" when empty.
VertexRef parse_vertex_ref(std::string_view text);
std::string format_vertex_ref(const VertexRef& ref);
std::string format_word(const Word& word);
Word parse_word(std::string_view text);

// k^m, throwing Error(resource) on overflow of 64 bits.
std::uint64_t word_count(int letter_count, int level);
std::uint64_t word_index(const Word& word, int letter_count);
Word word_from_index(std::uint64_t index, int level, int letter_count);

}  // namespace pcfgeo
