#include "ssg/words.hpp"

#include <algorithm>
#include <sstream>

#include "ssg/errors.hpp"

namespace ssg {

namespace {

/// Smallest p dividing n such that the word is the length-p prefix repeated.
size_t primitive_period(const std::vector<Letter>& block) {
  size_t n = block.size();
  for (size_t p = 1; p <= n; ++p) {
    if (n % p != 0) continue;
    bool ok = true;
    for (size_t i = p; i < n && ok; ++i) ok = block[i] == block[i - p];
    if (ok) return p;
  }
  return n;
}

}  // namespace

EventuallyPeriodicWord normalize(const EventuallyPeriodicWord& word) {
  if (word.tail.empty()) fail_invalid("eventually periodic word has empty tail block");
  EventuallyPeriodicWord out = word;

  size_t p = primitive_period(out.tail.letters);
  out.tail.letters.resize(p);

  // Absorb while the leftmost head letter matches the leftmost tail letter;
  // each absorption moves that letter into the repeating part, which rotates
  // the block left (z_k...z_1 becomes z_{k-1}...z_1 z_k).
  while (!out.head.empty() && out.head.letters.front() == out.tail.letters.front()) {
    out.head.letters.erase(out.head.letters.begin());
    Letter first = out.tail.letters.front();
    out.tail.letters.erase(out.tail.letters.begin());
    out.tail.letters.push_back(first);
  }
  return out;
}

EventuallyPeriodicWord shift(const EventuallyPeriodicWord& word) {
  EventuallyPeriodicWord w = normalize(word);
  if (!w.head.empty()) {
    w.head.letters.pop_back();
    return w;  // still canonical: the leftmost head letter did not change
  }
  // Purely periodic: dropping the rightmost letter rotates the block so that
  // its last letter moves to the front.
  Letter last = w.tail.letters.back();
  w.tail.letters.pop_back();
  w.tail.letters.insert(w.tail.letters.begin(), last);
  return w;
}

EventuallyPeriodicWord append(const EventuallyPeriodicWord& word,
                              const FiniteWord& suffix) {
  EventuallyPeriodicWord w = word;
  w.head.letters.insert(w.head.letters.end(), suffix.letters.begin(),
                        suffix.letters.end());
  return normalize(w);
}

Letter letter_at(const EventuallyPeriodicWord& word, uint64_t pos) {
  if (pos == 0) fail_invalid("word positions are 1-based");
  size_t h = word.head.size();
  if (pos <= h) return word.head.letters[h - pos];
  uint64_t offset = pos - h - 1;  // 0-based distance into the repeating part
  size_t k = word.tail.size();
  return word.tail.letters[k - 1 - static_cast<size_t>(offset % k)];
}

FiniteWord expand(const EventuallyPeriodicWord& word, size_t count) {
  FiniteWord out;
  out.letters.resize(count);
  for (size_t j = 0; j < count; ++j)
    out.letters[count - 1 - j] = letter_at(word, j + 1);
  return out;
}

std::string to_string(const FiniteWord& word) {
  std::string s;
  s.reserve(word.size());
  for (Letter x : word.letters) {
    if (x > 9) fail_invalid("digit rendering requires letters <= 9");
    s.push_back(static_cast<char>('0' + x));
  }
  return s;
}

std::string to_string(const EventuallyPeriodicWord& word) {
  return to_string(word.tail) + "*" + to_string(word.head);
}

namespace {

FiniteWord parse_digits(const std::string& text, int alphabet_size) {
  FiniteWord out;
  for (char c : text) {
    if (c < '0' || c > '9') fail_invalid("invalid letter character '" + std::string(1, c) + "'");
    int x = c - '0';
    if (x >= alphabet_size)
      fail_invalid("letter " + std::to_string(x) + " out of range for alphabet size " +
                   std::to_string(alphabet_size));
    out.letters.push_back(static_cast<Letter>(x));
  }
  return out;
}

FiniteWord parse_bracketed(const std::string& text, int alphabet_size) {
  if (text.size() < 2 || text.front() != '[' || text.back() != ']')
    fail_invalid("bracketed word must look like [0,1,0]: got '" + text + "'");
  FiniteWord out;
  std::string inner = text.substr(1, text.size() - 2);
  if (inner.empty()) return out;
  std::stringstream ss(inner);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t pos = 0;
    int x;
    try {
      x = std::stoi(item, &pos);
    } catch (const std::exception&) {
      fail_invalid("invalid letter '" + item + "' in bracketed word");
    }
    while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
    if (pos != item.size()) fail_invalid("invalid letter '" + item + "' in bracketed word");
    if (x < 0 || x >= alphabet_size)
      fail_invalid("letter " + std::to_string(x) + " out of range for alphabet size " +
                   std::to_string(alphabet_size));
    out.letters.push_back(static_cast<Letter>(x));
  }
  return out;
}

}  // namespace

FiniteWord parse_finite_word(const std::string& text, int alphabet_size) {
  if (!text.empty() && text.front() == '[') return parse_bracketed(text, alphabet_size);
  return parse_digits(text, alphabet_size);
}

EventuallyPeriodicWord parse_word(const std::string& text, int alphabet_size) {
  size_t star = text.find('*');
  if (star == std::string::npos)
    fail_invalid("eventually periodic word must contain '*': got '" + text + "'");
  EventuallyPeriodicWord w;
  w.tail = parse_finite_word(text.substr(0, star), alphabet_size);
  w.head = parse_finite_word(text.substr(star + 1), alphabet_size);
  if (w.tail.empty()) fail_invalid("recurring part before '*' must be nonempty");
  return normalize(w);
}

}  // namespace ssg
