#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hetmpc/types.hpp"

namespace hetmpc {

class Reader {
 public:
  explicit Reader(std::span<const Word> words) : p_(words.data()), end_(words.data() + words.size()) {}
  bool done() const { return p_ == end_; }
  std::size_t remaining() const { return static_cast<std::size_t>(end_ - p_); }
  Word next() {
    if (p_ == end_) throw std::out_of_range("Reader: read past end of payload");
    return *p_++;
  }

 private:
  const Word* p_;
  const Word* end_;
};

// Codec<T>::put appends the words of a value, Codec<T>::get reads one back.
template <class T>
struct Codec;

template <>
struct Codec<Word> {
  static void put(Payload& out, Word x) { out.push_back(x); }
  static Word get(Reader& in) { return in.next(); }
};

template <>
struct Codec<bool> {
  static void put(Payload& out, bool x) { out.push_back(x ? 1 : 0); }
  static bool get(Reader& in) { return in.next() != 0; }
};

template <>
struct Codec<Edge> {
  static void put(Payload& out, const Edge& e) { out.insert(out.end(), {e.u, e.v, e.w}); }
  static Edge get(Reader& in) {
    Edge e;
    e.u = in.next();
    e.v = in.next();
    e.w = in.next();
    return e;
  }
};

template <class A, class B>
struct Codec<std::pair<A, B>> {
  static void put(Payload& out, const std::pair<A, B>& p) {
    Codec<A>::put(out, p.first);
    Codec<B>::put(out, p.second);
  }
  static std::pair<A, B> get(Reader& in) {
    A a = Codec<A>::get(in);
    B b = Codec<B>::get(in);
    return {std::move(a), std::move(b)};
  }
};

// Length-prefixed sequence.
template <class T>
struct Codec<std::vector<T>> {
  static void put(Payload& out, const std::vector<T>& xs) {
    out.push_back(static_cast<Word>(xs.size()));
    for (const auto& x : xs) Codec<T>::put(out, x);
  }
  static std::vector<T> get(Reader& in) {
    auto n = static_cast<std::size_t>(in.next());
    std::vector<T> xs;
    xs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) xs.push_back(Codec<T>::get(in));
    return xs;
  }
};

template <class T>
void put(Payload& out, const T& x) {
  Codec<T>::put(out, x);
}

template <class T>
T get(Reader& in) {
  return Codec<T>::get(in);
}

template <class T>
std::size_t encoded_words(const T& x) {
  Payload tmp;
  Codec<T>::put(tmp, x);
  return tmp.size();
}

}  // namespace hetmpc
