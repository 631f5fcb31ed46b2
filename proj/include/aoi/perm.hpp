#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "aoi/errors.hpp"

namespace aoi::perm {

/// Ceiling for full state enumeration (n! states, (n+1)n! unknowns); the
/// dense oracle stops being desk-scale beyond this.
inline constexpr int kDefaultMaxServers = 8;

/// An ordering of server indices by update freshness: the discrete state of
/// the heterogeneous chain. Canonically a bijection on {1..n}; restrictions
/// to a value subset appear inside the block solver and are equally valid.
class Permutation {
 public:
  Permutation() = default;

  explicit Permutation(std::vector<int> elems) : elems_(std::move(elems)) {
    std::vector<int> sorted = elems_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() ||
        (!sorted.empty() && sorted.front() < 1)) {
      throw Error(ErrorCode::PreconditionViolated,
                  "permutation elements must be distinct positive integers");
    }
  }

  Permutation(std::initializer_list<int> elems) : Permutation(std::vector<int>(elems)) {}

  static Permutation identity(int n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i + 1;
    return Permutation(std::move(v));
  }

  int size() const { return static_cast<int>(elems_.size()); }
  /// 1-based element access, matching the ordering convention of the model.
  int at(int pos) const { return elems_[static_cast<std::size_t>(pos - 1)]; }
  const std::vector<int>& elems() const { return elems_; }

  bool operator==(const Permutation& other) const = default;
  auto operator<=>(const Permutation& other) const = default;

  std::string str() const {
    std::string s = "(";
    for (int i = 0; i < size(); ++i) {
      if (i) s += ",";
      s += std::to_string(elems_[static_cast<std::size_t>(i)]);
    }
    return s + ")";
  }

 private:
  std::vector<int> elems_;
};

inline void check_position(int i, int n, const char* what) {
  if (i < 1 || i > n) {
    throw Error(ErrorCode::IndexOutOfRange,
                std::string(what) + ": position " + std::to_string(i) + " not in 1.." +
                    std::to_string(n),
                i);
  }
}

/// Moves the i-th element to the front, shifting elements 1..i-1 right:
/// (q_i, q_1, ..., q_{i-1}, q_{i+1}, ..., q_n).
inline Permutation to_front(int i, const Permutation& q) {
  check_position(i, q.size(), "to_front");
  std::vector<int> r = q.elems();
  std::rotate(r.begin(), r.begin() + (i - 1), r.begin() + i);
  return Permutation(std::move(r));
}

/// Inverse of to_front: sends the front element to position i, shifting
/// elements 2..i left: (q_2, ..., q_i, q_1, q_{i+1}, ..., q_n).
inline Permutation front_to(int i, const Permutation& q) {
  check_position(i, q.size(), "front_to");
  std::vector<int> r = q.elems();
  std::rotate(r.begin(), r.begin() + 1, r.begin() + i);
  return Permutation(std::move(r));
}

/// The n states that can transition into q on an update arrival
/// (front_to(i, q) for i = 1..n; includes q itself via i = 1).
inline std::set<Permutation> incoming_states(const Permutation& q) {
  std::set<Permutation> in;
  for (int i = 1; i <= q.size(); ++i) in.insert(front_to(i, q));
  return in;
}

/// Moves the k-th element into the head of the length-j tail (position n-j),
/// shifting positions n-j..k-1 right. Valid for 1 <= j <= n-1 and
/// n-j <= k <= n; k = n-j is the identity.
inline Permutation into_tail(int j, int k, const Permutation& q) {
  const int n = q.size();
  if (j < 1 || j > n - 1) {
    throw Error(ErrorCode::IndexOutOfRange, "into_tail: tail length " + std::to_string(j), j);
  }
  if (k < n - j || k > n) {
    throw Error(ErrorCode::IndexOutOfRange, "into_tail: source position " + std::to_string(k), k);
  }
  std::vector<int> r = q.elems();
  std::rotate(r.begin() + (n - j - 1), r.begin() + (k - 1), r.begin() + k);
  return Permutation(std::move(r));
}

/// True when the last j positions are strictly increasing. Every permutation
/// has 0- and 1-increasing tails.
inline bool has_increasing_tail(int j, const Permutation& q) {
  const int n = q.size();
  for (int pos = n - j + 2; pos <= n; ++pos) {
    if (pos >= 2 && q.at(pos - 1) >= q.at(pos)) return false;
  }
  return true;
}

/// Extends an increasing tail of length level-1 to length level by inserting
/// the element just ahead of it into its sorted place (treating the slot past
/// the end as +infinity). Requires the input tail to be (level-1)-increasing;
/// level 1 is the identity.
inline Permutation sort_into_tail(int level, const Permutation& p) {
  const int n = p.size();
  const int j = level - 1;
  if (level < 1 || level > n) {
    throw Error(ErrorCode::IndexOutOfRange, "sort_into_tail: level " + std::to_string(level),
                level);
  }
  if (!has_increasing_tail(j, p)) {
    throw Error(ErrorCode::PreconditionViolated,
                "sort_into_tail: " + p.str() + " lacks an increasing tail of length " +
                    std::to_string(j));
  }
  if (level == 1 || has_increasing_tail(level, p)) return p;
  std::vector<int> r = p.elems();
  const auto tail_begin = r.begin() + (n - j - 1);
  const int moved = *tail_begin;
  auto dest = std::upper_bound(tail_begin + 1, r.end(), moved);
  std::rotate(tail_begin, tail_begin + 1, dest);
  return Permutation(std::move(r));
}

/// All permutations of the given sorted distinct values, lexicographically.
inline std::vector<Permutation> enumerate_values(std::vector<int> values,
                                                 int max_n = kDefaultMaxServers) {
  const int n = static_cast<int>(values.size());
  if (n > max_n) {
    throw Error(ErrorCode::TooLarge,
                "enumerate: n = " + std::to_string(n) + " exceeds limit " + std::to_string(max_n),
                n);
  }
  std::sort(values.begin(), values.end());
  std::vector<Permutation> all;
  do {
    all.emplace_back(values);
  } while (std::next_permutation(values.begin(), values.end()));
  return all;
}

/// All permutations of {1..n} in lexicographic order; the position in this
/// list is the canonical state index.
inline std::vector<Permutation> enumerate(int n, int max_n = kDefaultMaxServers) {
  if (n < 1) {
    throw Error(ErrorCode::IndexOutOfRange, "enumerate: n must be >= 1", n);
  }
  return enumerate_values(Permutation::identity(n).elems(), max_n);
}

/// Lexicographic rank of q among the permutations of its own value set.
inline std::int64_t lex_rank(const Permutation& q) {
  const int n = q.size();
  std::int64_t rank = 0;
  std::int64_t fact = 1;
  for (int i = 2; i <= n; ++i) fact *= i;  // n!
  for (int pos = 1; pos <= n; ++pos) {
    fact /= (n - pos + 1);
    int smaller = 0;
    for (int later = pos + 1; later <= n; ++later) {
      if (q.at(later) < q.at(pos)) ++smaller;
    }
    rank += smaller * fact;
  }
  return rank;
}

}  // namespace aoi::perm
