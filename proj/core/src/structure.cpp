#include "pcfgeo/structure.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>

#include "pcfgeo/error.hpp"

namespace pcfgeo {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::validation: return "validation";
    case ErrorKind::resource: return "resource";
    case ErrorKind::degenerate_form: return "degenerate-form";
    case ErrorKind::no_equal_weight_structure: return "no-equal-weight-structure";
    case ErrorKind::broken_structure: return "broken-structure";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::internal: return "internal";
  }
  return "unknown";
}

namespace {

[[noreturn]] void reject(const std::string& what) {
  throw Error(ErrorKind::validation, "invalid fractal spec: " + what);
}

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

char digit_char(int d) {
  return d < 10 ? static_cast<char>('0' + d) : static_cast<char>('a' + (d - 10));
}

int digit_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'z') return c - 'a' + 10;
  return -1;
}

}  // namespace

void check_ref(const FractalSpec& spec, const VertexRef& ref) {
  if (ref.label < 0 || ref.label >= spec.boundary_count) {
    throw Error(ErrorKind::invalid_argument,
                "label of " + format_vertex_ref(ref) + " is outside [0, " +
                    std::to_string(spec.boundary_count) + ")");
  }
  for (Letter l : ref.word) {
    if (l >= spec.letter_count) {
      throw Error(ErrorKind::invalid_argument, "letter of " + format_vertex_ref(ref) +
                                                   " is outside [0, " +
                                                   std::to_string(spec.letter_count) + ")");
    }
  }
}

void validate(const FractalSpec& spec) {
  const int k = spec.letter_count;
  const int q = spec.boundary_count;
  if (k < 2 || k > kMaxLetters) {
    reject("letters must be in [2, " + std::to_string(kMaxLetters) + "], got " + std::to_string(k));
  }
  if (q < 2) reject("boundary must be at least 2, got " + std::to_string(q));
  if (static_cast<int>(spec.fixed_letter.size()) != q) {
    reject("fixed_letters has " + std::to_string(spec.fixed_letter.size()) +
           " entries, expected boundary = " + std::to_string(q));
  }
  std::vector<bool> used(k, false);
  for (int a = 0; a < q; ++a) {
    const int i = spec.fixed_letter[a];
    if (i < 0 || i >= k) reject("fixed_letters[" + std::to_string(a) + "] out of range");
    if (used[i]) reject("fixed_letters is not injective (letter " + std::to_string(i) + ")");
    used[i] = true;
  }

  std::vector<int> cell_parent(k);
  std::iota(cell_parent.begin(), cell_parent.end(), 0);
  std::vector<int> addr_parent(static_cast<std::size_t>(k) * q);
  std::iota(addr_parent.begin(), addr_parent.end(), 0);
  for (std::size_t e = 0; e < spec.glue.size(); ++e) {
    const GlueRule& g = spec.glue[e];
    const std::string where = "glue[" + std::to_string(e) + "] = [" + std::to_string(g.letter_a) +
                              "," + std::to_string(g.label_a) + "," + std::to_string(g.letter_b) +
                              "," + std::to_string(g.label_b) + "]";
    if (g.letter_a < 0 || g.letter_a >= k || g.letter_b < 0 || g.letter_b >= k) {
      reject(where + ": letter out of range");
    }
    if (g.label_a < 0 || g.label_a >= q || g.label_b < 0 || g.label_b >= q) {
      reject(where + ": label out of range");
    }
    if (g.letter_a == g.letter_b) reject(where + ": glues a cell to itself");
    cell_parent[find_root(cell_parent, g.letter_a)] = find_root(cell_parent, g.letter_b);
    addr_parent[find_root(addr_parent, g.letter_a * q + g.label_a)] =
        find_root(addr_parent, g.letter_b * q + g.label_b);
  }
  for (int i = 1; i < k; ++i) {
    if (find_root(cell_parent, i) != find_root(cell_parent, 0)) {
      reject("level-1 cell graph is disconnected (letter " + std::to_string(i) + ")");
    }
  }
  // psi_i is injective and boundary points are distinct.
  std::vector<int> owner(addr_parent.size(), -1);
  for (int i = 0; i < k; ++i) {
    for (int b = 0; b < q; ++b) {
      const int root = find_root(addr_parent, i * q + b);
      if (owner[root] == i) reject("gluing identifies two corners of cell " + std::to_string(i));
      owner[root] = i;
    }
  }
  std::vector<int> boundary_of_class(addr_parent.size(), -1);
  for (int a = 0; a < q; ++a) {
    const int root = find_root(addr_parent, spec.fixed_letter[a] * q + a);
    if (boundary_of_class[root] >= 0) {
      reject("gluing identifies boundary points " + std::to_string(boundary_of_class[root]) +
             " and " + std::to_string(a));
    }
    boundary_of_class[root] = a;
  }
}

int fixed_label_of_letter(const FractalSpec& spec, int letter) {
  for (int a = 0; a < spec.boundary_count; ++a) {
    if (spec.fixed_letter[a] == letter) return a;
  }
  return -1;
}

std::vector<VertexRef> address_orbit(const FractalSpec& spec, const VertexRef& ref) {
  check_ref(spec, ref);
  std::set<VertexRef> seen{ref};
  std::deque<VertexRef> pending{ref};
  while (!pending.empty()) {
    VertexRef cur = std::move(pending.front());
    pending.pop_front();
    const int m = cur.level();
    const Letter tail = static_cast<Letter>(spec.fixed_letter[cur.label]);
    // cur = (u i tail^t, label) for every t up to the trailing run of tail.
    for (int t = 0; t < m; ++t) {
      const int pos = m - 1 - t;
      const int i = cur.word[pos];
      for (const GlueRule& g : spec.glue) {
        int j = -1;
        int b = -1;
        if (g.letter_a == i && g.label_a == cur.label) {
          j = g.letter_b;
          b = g.label_b;
        } else if (g.letter_b == i && g.label_b == cur.label) {
          j = g.letter_a;
          b = g.label_a;
        } else {
          continue;
        }
        VertexRef next;
        next.word.assign(cur.word.begin(), cur.word.begin() + pos);
        next.word.push_back(static_cast<Letter>(j));
        next.word.insert(next.word.end(), t, static_cast<Letter>(spec.fixed_letter[b]));
        next.label = b;
        if (seen.insert(next).second) pending.push_back(std::move(next));
      }
      if (i != tail) break;
    }
  }
  return {seen.begin(), seen.end()};
}

VertexRef canonicalize(const FractalSpec& spec, const VertexRef& ref) {
  check_ref(spec, ref);
  if (ref.word.empty()) return ref;
  return address_orbit(spec, ref).front();
}

VertexRef lift(const FractalSpec& spec, const VertexRef& ref, int n) {
  check_ref(spec, ref);
  if (n < ref.level()) {
    throw Error(ErrorKind::invalid_argument,
                "cannot lift " + format_vertex_ref(ref) + " to lower level " + std::to_string(n));
  }
  VertexRef out = ref;
  out.word.resize(static_cast<std::size_t>(n), static_cast<Letter>(spec.fixed_letter[ref.label]));
  return out;
}

VertexRef minimal_ref(const FractalSpec& spec, const VertexRef& ref) {
  VertexRef best;
  bool have = false;
  for (VertexRef r : address_orbit(spec, ref)) {
    const Letter tail = static_cast<Letter>(spec.fixed_letter[r.label]);
    while (!r.word.empty() && r.word.back() == tail) r.word.pop_back();
    if (!have || r.level() < best.level()) {
      best = std::move(r);
      have = true;
    }
  }
  return canonicalize(spec, best);
}

std::string format_word(const Word& word) {
  if (word.empty()) return "-";
  std::string s;
  s.reserve(word.size());
  for (Letter l : word) s.push_back(digit_char(l));
  return s;
}

Word parse_word(std::string_view text) {
  Word w;
  if (text == "-") return w;
  if (text.empty()) throw Error(ErrorKind::invalid_argument, "empty word (use '-')");
  for (char c : text) {
    const int d = digit_value(c);
    if (d < 0) throw Error(ErrorKind::invalid_argument, "bad letter '" + std::string(1, c) + "' in word");
    w.push_back(static_cast<Letter>(d));
  }
  return w;
}

std::string format_vertex_ref(const VertexRef& ref) {
  return format_word(ref.word) + ":" + std::to_string(ref.label);
}

VertexRef parse_vertex_ref(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos || colon + 1 >= text.size()) {
    throw Error(ErrorKind::invalid_argument,
                "vertex ref '" + std::string(text) + "' must look like word:label");
  }
  VertexRef ref;
  ref.word = parse_word(text.substr(0, colon));
  const std::string_view label = text.substr(colon + 1);
  int value = 0;
  for (char c : label) {
    if (c < '0' || c > '9' || value > 1000000) {
      throw Error(ErrorKind::invalid_argument, "bad label in vertex ref '" + std::string(text) + "'");
    }
    value = value * 10 + (c - '0');
  }
  ref.label = value;
  return ref;
}

std::uint64_t word_count(int letter_count, int level) {
  std::uint64_t count = 1;
  for (int m = 0; m < level; ++m) {
    if (count > UINT64_MAX / static_cast<std::uint64_t>(letter_count)) {
      throw Error(ErrorKind::resource, "k^n overflows for k = " + std::to_string(letter_count) +
                                           ", n = " + std::to_string(level));
    }
    count *= static_cast<std::uint64_t>(letter_count);
  }
  return count;
}

std::uint64_t word_index(const Word& word, int letter_count) {
  std::uint64_t index = 0;
  for (Letter l : word) index = index * static_cast<std::uint64_t>(letter_count) + l;
  return index;
}

Word word_from_index(std::uint64_t index, int level, int letter_count) {
  Word w(static_cast<std::size_t>(level));
  for (int pos = level - 1; pos >= 0; --pos) {
    w[pos] = static_cast<Letter>(index % static_cast<std::uint64_t>(letter_count));
    index /= static_cast<std::uint64_t>(letter_count);
  }
  return w;
}

}  // namespace pcfgeo
