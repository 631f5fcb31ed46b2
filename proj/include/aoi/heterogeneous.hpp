#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "aoi/errors.hpp"
#include "aoi/linalg.hpp"
#include "aoi/perm.hpp"

namespace aoi::heterogeneous {

using perm::Permutation;

struct HeteroParams {
  int n = 1;
  std::vector<double> lambdas;  // per-server arrival rate of the single source
  std::vector<double> mus;      // per-server service rate
};

inline void check_params(const HeteroParams& p) {
  if (p.n < 1 || static_cast<int>(p.lambdas.size()) != p.n ||
      static_cast<int>(p.mus.size()) != p.n) {
    throw Error(ErrorCode::InvalidParams, "need n >= 1 with n arrival and n service rates");
  }
  for (int j = 0; j < p.n; ++j) {
    if (!(p.lambdas[static_cast<std::size_t>(j)] > 0.0)) {
      throw Error(ErrorCode::InvalidParams, "arrival rate of server " + std::to_string(j + 1) +
                                                " must be > 0 for the exact solver",
                  j);
    }
    if (!(p.mus[static_cast<std::size_t>(j)] > 0.0)) {
      throw Error(ErrorCode::InvalidParams,
                  "service rate of server " + std::to_string(j + 1) + " must be > 0", j);
    }
  }
}

/// Stationary distribution over freshness orderings. A state's probability
/// is a product of arrival-rate ratios over its prefix, independent of the
/// service rates.
struct SteadyState {
  std::vector<Permutation> states;  // lexicographic
  std::vector<double> pi;           // aligned with states

  double probability(const Permutation& q) const {
    return pi[static_cast<std::size_t>(perm::lex_rank(q))];
  }
};

inline SteadyState steady_state(const HeteroParams& p, int max_n = perm::kDefaultMaxServers) {
  check_params(p);
  SteadyState out;
  out.states = perm::enumerate(p.n, max_n);
  out.pi.reserve(out.states.size());
  for (const Permutation& q : out.states) {
    double prob = 1.0;
    double tail_rate = 0.0;
    for (int r = p.n; r >= 1; --r) tail_rate += p.lambdas[static_cast<std::size_t>(q.at(r) - 1)];
    for (int r = 1; r <= p.n - 1; ++r) {
      prob *= p.lambdas[static_cast<std::size_t>(q.at(r) - 1)] / tail_rate;
      tail_rate -= p.lambdas[static_cast<std::size_t>(q.at(r) - 1)];
    }
    out.pi.push_back(prob);
  }
  return out;
}

/// The (n+1)*n! transition equations in sparse row form. Row and column
/// (q, i) is position i of state q: column (q, 0) is the monitor variable of
/// state q and column (q, i) the age of the server holding the i-th freshest
/// update. Rows and columns share the layout rank(q)*(n+1) + i.
struct SparseLinearSystem {
  int n = 0;
  std::vector<Permutation> states;
  std::vector<std::vector<std::pair<int, double>>> rows;
  std::vector<double> rhs;

  int index(std::int64_t state_rank, int i) const {
    return static_cast<int>(state_rank * (n + 1)) + i;
  }
  std::size_t dim() const { return rows.size(); }
};

/// Assembles the transition equations. Sums over rate subsets are computed
/// from sorted value sets so that states sharing a front element get
/// bit-identical diagonals; the elimination in solve_structured relies on
/// those exact cancellations.
inline SparseLinearSystem build_system(const HeteroParams& p,
                                       int max_n = perm::kDefaultMaxServers) {
  check_params(p);
  const int n = p.n;
  SparseLinearSystem sys;
  sys.n = n;
  sys.states = perm::enumerate(n, max_n);
  const SteadyState ss = steady_state(p, max_n);

  double lambda_total = 0.0, mu_total = 0.0;
  for (int j = 0; j < n; ++j) {
    lambda_total += p.lambdas[static_cast<std::size_t>(j)];
    mu_total += p.mus[static_cast<std::size_t>(j)];
  }
  // service-rate sum over a value set, accumulated in value order
  auto mu_sum_sorted = [&](const Permutation& q, int count) {
    std::vector<int> vals;
    vals.reserve(static_cast<std::size_t>(count));
    for (int l = 1; l <= count; ++l) vals.push_back(q.at(l));
    std::sort(vals.begin(), vals.end());
    double s = 0.0;
    for (int v : vals) s += p.mus[static_cast<std::size_t>(v - 1)];
    return s;
  };

  const auto n_states = sys.states.size();
  sys.rows.resize(n_states * static_cast<std::size_t>(n + 1));
  sys.rhs.resize(n_states * static_cast<std::size_t>(n + 1));
  for (std::size_t rank = 0; rank < n_states; ++rank) {
    const Permutation& q = sys.states[rank];
    const double lam_front = p.lambdas[static_cast<std::size_t>(q.at(1) - 1)];
    std::vector<std::int64_t> pred_rank(static_cast<std::size_t>(n) + 1, 0);
    for (int j = 2; j <= n; ++j) {
      pred_rank[static_cast<std::size_t>(j)] = perm::lex_rank(perm::front_to(j, q));
    }
    for (int i = 0; i <= n; ++i) {
      auto& row = sys.rows[static_cast<std::size_t>(sys.index(static_cast<std::int64_t>(rank), i))];
      sys.rhs[static_cast<std::size_t>(sys.index(static_cast<std::int64_t>(rank), i))] =
          ss.pi[rank];
      if (i == 0) {
        row.emplace_back(sys.index(static_cast<std::int64_t>(rank), 0),
                         (lambda_total - lam_front) + mu_total);
        for (int k = 1; k <= n; ++k) {
          row.emplace_back(sys.index(static_cast<std::int64_t>(rank), k),
                           -p.mus[static_cast<std::size_t>(q.at(k) - 1)]);
        }
        for (int j = 2; j <= n; ++j) {
          row.emplace_back(sys.index(pred_rank[static_cast<std::size_t>(j)], 0), -lam_front);
        }
      } else if (i == 1) {
        row.emplace_back(sys.index(static_cast<std::int64_t>(rank), 1), lambda_total);
      } else {
        row.emplace_back(sys.index(static_cast<std::int64_t>(rank), i),
                         (lambda_total - lam_front) + mu_sum_sorted(q, i - 1));
        for (int k = 1; k <= i - 1; ++k) {
          row.emplace_back(sys.index(static_cast<std::int64_t>(rank), k),
                           -p.mus[static_cast<std::size_t>(q.at(k) - 1)]);
        }
        for (int j = 2; j <= n; ++j) {
          const int k = i <= j ? i - 1 : i;
          row.emplace_back(sys.index(pred_rank[static_cast<std::size_t>(j)], k), -lam_front);
        }
      }
    }
  }
  return sys;
}

/// Independent oracle: materializes the full system and eliminates it with
/// partial pivoting. Practical up to n = 5 or so.
inline std::vector<double> solve_dense(const SparseLinearSystem& sys) {
  const std::size_t dim = sys.dim();
  linalg::DenseMatrix a(dim, dim);
  double scale = 1.0;
  for (std::size_t r = 0; r < dim; ++r) {
    for (const auto& [c, val] : sys.rows[r]) {
      a(r, static_cast<std::size_t>(c)) += val;
      scale = std::max(scale, std::fabs(val));
    }
  }
  std::vector<double> v = linalg::gaussian_solve(a, sys.rhs);
  if (!(linalg::residual_maxnorm(a, v, sys.rhs) <= 1e-9 * scale)) {
    throw Error(ErrorCode::SingularSystem, "dense solve residual too large");
  }
  return v;
}

/// Coefficient block in the recurring elimination shape: one column per
/// permutation of a value set, a positive diagonal, and the only couplings
/// sitting at the front-rotation predecessors of each column's state.
struct T0Block {
  int param = 0;                   // permutation length (block is param! wide)
  std::vector<Permutation> states; // lexicographic
  std::vector<std::vector<std::pair<int, double>>> cols;

  std::size_t dim() const { return states.size(); }
};

/// Test hook: the matrices left after each forward iteration of the block
/// solver, over the states still active at that point.
struct ForwardTrace {
  struct Stage {
    int iteration = 0;
    std::vector<int> active;  // local state indices, j-increasing
    std::map<std::pair<int, int>, double> entries;  // (row, col) of the reduced matrix
  };
  std::vector<Stage> stages;
  double final_scalar = 0.0;
};

namespace counters {
// Every block solve re-checks the closing identity sum(v) = sum(c)/mu_total;
// these make that visible to the verification suite.
inline std::atomic<std::uint64_t> block_solves{0};
inline std::atomic<std::uint64_t> sum_identity_checks{0};
}  // namespace counters

namespace detail {

inline void merge_entries(std::vector<std::pair<int, double>>& entries, double drop_below) {
  std::sort(entries.begin(), entries.end());
  std::size_t out = 0;
  for (std::size_t i = 0; i < entries.size();) {
    int row = entries[i].first;
    double acc = 0.0;
    while (i < entries.size() && entries[i].first == row) {
      acc += entries[i].second;
      ++i;
    }
    if (std::fabs(acc) > drop_below) entries[out++] = {row, acc};
  }
  entries.resize(out);
}

// length of the strictly increasing run at the tail
inline int tail_run(const Permutation& q) {
  int run = std::min(1, q.size());
  while (run < q.size() && q.at(q.size() - run) < q.at(q.size() - run + 1)) ++run;
  return run;
}

inline void validate_block(const T0Block& t0, double column_sum_scale) {
  const std::size_t dim = t0.dim();
  if (dim <= 1) return;
  const int k = t0.param;
  for (std::size_t cp = 0; cp < dim; ++cp) {
    std::vector<int> expected;
    for (int i = 2; i <= k; ++i) {
      expected.push_back(static_cast<int>(perm::lex_rank(perm::to_front(i, t0.states[cp]))));
    }
    std::sort(expected.begin(), expected.end());
    std::vector<int> actual;
    bool diag_seen = false;
    for (const auto& [row, val] : t0.cols[cp]) {
      if (row == static_cast<int>(cp)) {
        diag_seen = val > 0.0;
      } else {
        if (!(val < 0.0)) {
          throw Error(ErrorCode::StructureMismatch, "block off-diagonal must be negative");
        }
        actual.push_back(row);
      }
    }
    std::sort(actual.begin(), actual.end());
    if (!diag_seen || actual != expected) {
      throw Error(ErrorCode::StructureMismatch,
                  "block column " + t0.states[cp].str() + " has the wrong coupling pattern");
    }
  }
  // all column sums must agree (they equal the block's service-rate total)
  double first = 0.0;
  for (std::size_t cp = 0; cp < dim; ++cp) {
    double s = 0.0;
    for (const auto& [row, val] : t0.cols[cp]) s += val;
    if (cp == 0) {
      first = s;
    } else if (std::fabs(s - first) > 1e-9 * column_sum_scale) {
      throw Error(ErrorCode::StructureMismatch, "block column sums are not constant");
    }
  }
}

}  // namespace detail

/// Solves one T0-shaped block by the forward/backward elimination: forward
/// iterations fold each state group into its tail-sorted representative by
/// column and row operations until a single scalar equation remains (the
/// service-rate total), then the backward pass solves the excluded groups as
/// smaller T0 blocks and unwinds the variable sums.
inline std::vector<double> solve_block(const T0Block& t0, std::vector<double> c,
                                       ForwardTrace* trace = nullptr) {
  const std::size_t dim = t0.dim();
  if (dim == 0 || c.size() != dim) {
    throw Error(ErrorCode::InvalidParams, "block and constant vector sizes disagree");
  }
  ++counters::block_solves;
  if (dim == 1) {
    if (t0.cols.empty() || t0.cols[0].empty() || !(t0.cols[0][0].second > 0.0)) {
      throw Error(ErrorCode::StructureMismatch, "scalar block must have a positive coefficient");
    }
    ++counters::sum_identity_checks;
    return {c[0] / t0.cols[0][0].second};
  }

  const int k = t0.param;
  double column_sum = 0.0, scale = 0.0;
  for (const auto& [row, val] : t0.cols[0]) {
    column_sum += val;
    scale = std::max(scale, std::fabs(val));
  }
  detail::validate_block(t0, scale);
  const double drop_below = 1e-13 * scale;
  const double c_total = [&] {
    double s = 0.0;
    for (double x : c) s += x;
    return s;
  }();

  std::vector<int> tail_level(dim);
  for (std::size_t i = 0; i < dim; ++i) tail_level[i] = detail::tail_run(t0.states[i]);

  auto local_rank = [&](const Permutation& q) {
    return static_cast<int>(perm::lex_rank(q));
  };

  struct StageData {
    int j = 0;
    std::vector<double> c_prev;                                  // c before the row fold
    std::vector<std::vector<std::pair<int, double>>> coupling;   // per excluded row: solved cols
    std::vector<std::vector<std::pair<int, double>>> remainder;  // per excluded row: excluded cols
  };
  std::vector<StageData> stages;
  stages.reserve(static_cast<std::size_t>(k));

  auto cols = t0.cols;
  for (int j = 1; j <= k - 1; ++j) {
    // column operations: subtract each kept column from the columns of the
    // states that fold into it
    for (std::size_t pi = 0; pi < dim; ++pi) {
      if (tail_level[pi] < j + 1) continue;
      for (int kk = k - j + 1; kk <= k; ++kk) {
        const int gi = local_rank(perm::into_tail(j, kk, t0.states[pi]));
        auto& dst = cols[static_cast<std::size_t>(gi)];
        for (const auto& [row, val] : cols[pi]) dst.emplace_back(row, -val);
        detail::merge_entries(dst, drop_below);
      }
    }

    StageData stage;
    stage.j = j;
    stage.c_prev = c;

    // row operations: every excluded row folds into its tail-sorted target
    std::vector<int> fold_target(dim, -1);
    for (std::size_t ri = 0; ri < dim; ++ri) {
      if (tail_level[ri] == j) {
        fold_target[ri] = local_rank(perm::sort_into_tail(j + 1, t0.states[ri]));
      }
    }
    for (std::size_t ci = 0; ci < dim; ++ci) {
      if (cols[ci].empty()) continue;
      auto& col = cols[ci];
      const std::size_t original = col.size();
      for (std::size_t e = 0; e < original; ++e) {
        if (fold_target[static_cast<std::size_t>(col[e].first)] >= 0) {
          col.emplace_back(fold_target[static_cast<std::size_t>(col[e].first)], col[e].second);
        }
      }
      detail::merge_entries(col, drop_below);
    }
    for (std::size_t ri = 0; ri < dim; ++ri) {
      if (fold_target[ri] >= 0) c[static_cast<std::size_t>(fold_target[ri])] += c[ri];
    }

    if (trace) {
      ForwardTrace::Stage snap;
      snap.iteration = j;
      for (std::size_t i = 0; i < dim; ++i) {
        if (tail_level[i] >= j) snap.active.push_back(static_cast<int>(i));
      }
      for (std::size_t ci = 0; ci < dim; ++ci) {
        for (const auto& [row, val] : cols[ci]) {
          snap.entries[{row, static_cast<int>(ci)}] = val;
        }
      }
      trace->stages.push_back(std::move(snap));
    }

    // partition: keep the (j+1)-increasing square, remember the excluded rows
    stage.coupling.resize(dim);
    stage.remainder.resize(dim);
    for (std::size_t ci = 0; ci < dim; ++ci) {
      if (cols[ci].empty()) continue;
      const bool col_kept = tail_level[ci] >= j + 1;
      std::vector<std::pair<int, double>> kept;
      for (const auto& [row, val] : cols[ci]) {
        const bool row_kept = tail_level[static_cast<std::size_t>(row)] >= j + 1;
        if (row_kept && col_kept) {
          kept.emplace_back(row, val);
        } else if (!row_kept && col_kept) {
          stage.coupling[static_cast<std::size_t>(row)].emplace_back(static_cast<int>(ci), val);
        } else if (!row_kept && !col_kept) {
          stage.remainder[static_cast<std::size_t>(row)].emplace_back(static_cast<int>(ci), val);
        }
        // kept row, excluded column: exact cancellation up to the drop
        // threshold; nothing survives here by construction
      }
      if (col_kept) {
        cols[ci] = std::move(kept);
      } else {
        cols[ci].clear();
      }
    }
    stages.push_back(std::move(stage));
  }

  // the fully increasing state is all that remains
  const int top = local_rank(Permutation(
      [&] {
        std::vector<int> v = t0.states[0].elems();
        std::sort(v.begin(), v.end());
        return v;
      }()));
  double scalar = 0.0;
  for (const auto& [row, val] : cols[static_cast<std::size_t>(top)]) {
    if (row == top) scalar = val;
  }
  if (!(std::fabs(scalar - column_sum) <= 1e-9 * scale)) {
    throw Error(ErrorCode::StructureMismatch,
                "forward reduction did not close to the service-rate total");
  }
  if (trace) trace->final_scalar = scalar;

  std::vector<double> v(dim, 0.0);
  v[static_cast<std::size_t>(top)] = c[static_cast<std::size_t>(top)] / scalar;

  // backward pass
  for (int j = k - 1; j >= 1; --j) {
    const StageData& stage = stages[static_cast<std::size_t>(j - 1)];
    // group the excluded states by their last j+1 values
    std::map<std::vector<int>, std::vector<int>> groups;
    for (std::size_t ri = 0; ri < dim; ++ri) {
      if (tail_level[ri] != j) continue;
      std::vector<int> suffix;
      for (int pos = k - j; pos <= k; ++pos) suffix.push_back(t0.states[ri].at(pos));
      groups[suffix].push_back(static_cast<int>(ri));
    }
    std::vector<int> member_pos(dim, -1);
    for (const auto& [suffix, members] : groups) {
      T0Block sub;
      sub.param = k - j - 1;
      std::vector<double> rhs;
      rhs.reserve(members.size());
      for (std::size_t li = 0; li < members.size(); ++li) {
        member_pos[static_cast<std::size_t>(members[li])] = static_cast<int>(li);
      }
      for (int ri : members) {
        std::vector<int> prefix;
        for (int pos = 1; pos <= k - j - 1; ++pos) prefix.push_back(t0.states[ri].at(pos));
        sub.states.emplace_back(std::move(prefix));
        double value = stage.c_prev[static_cast<std::size_t>(ri)];
        for (const auto& [col, val] : stage.coupling[static_cast<std::size_t>(ri)]) {
          value -= val * v[static_cast<std::size_t>(col)];
        }
        rhs.push_back(value);
      }
      sub.cols.resize(members.size());
      for (std::size_t li = 0; li < members.size(); ++li) {
        for (const auto& [col, val] : stage.remainder[static_cast<std::size_t>(members[li])]) {
          const int lc = member_pos[static_cast<std::size_t>(col)];
          if (lc < 0) {
            throw Error(ErrorCode::StructureMismatch,
                        "excluded block row couples outside its suffix group");
          }
          sub.cols[static_cast<std::size_t>(lc)].emplace_back(static_cast<int>(li), val);
        }
      }
      const std::vector<double> solved = solve_block(sub, std::move(rhs), nullptr);
      for (std::size_t li = 0; li < members.size(); ++li) {
        v[static_cast<std::size_t>(members[li])] = solved[li];
        member_pos[static_cast<std::size_t>(members[li])] = -1;
      }
    }
    // unwind the column-op sums on the kept states
    for (std::size_t pi = 0; pi < dim; ++pi) {
      if (tail_level[pi] < j + 1) continue;
      double acc = v[pi];
      for (int kk = k - j + 1; kk <= k; ++kk) {
        acc -= v[static_cast<std::size_t>(local_rank(perm::into_tail(j, kk, t0.states[pi])))];
      }
      v[pi] = acc;
    }
  }

  // closing identity: the variable sum times the service-rate total gives the
  // constant sum
  double v_total = 0.0;
  for (double x : v) v_total += x;
  if (!(std::fabs(v_total * column_sum - c_total) <=
        1e-9 * std::max(std::fabs(c_total), 1e-300))) {
    throw Error(ErrorCode::StructureMismatch, "block solution violates the sum identity");
  }
  ++counters::sum_identity_checks;
  return v;
}

struct HeteroSolution {
  double aoi = 0.0;
  std::vector<double> v;  // full correlation vector, laid out as the system rows
};

/// Exact average age for one source and arbitrary per-server rates: solves
/// the transition system blockwise. Variables are solved suffix group by
/// suffix group; every block the elimination sees has the T0 shape, and the
/// constants of later blocks fold in the already-solved variables. Groups at
/// one level touch disjoint variables, so they may be solved in any order
/// (or concurrently).
inline HeteroSolution solve_structured(const HeteroParams& p,
                                       int max_n = perm::kDefaultMaxServers) {
  const SparseLinearSystem sys = build_system(p, max_n);
  const int n = p.n;
  const auto n_states = sys.states.size();
  std::vector<double> v(sys.dim(), std::numeric_limits<double>::quiet_NaN());
  std::vector<char> solved(sys.dim(), 0);

  double lambda_total = 0.0;
  for (double l : p.lambdas) lambda_total += l;

  // freshest position first: those rows are diagonal
  for (std::size_t rank = 0; rank < n_states; ++rank) {
    const auto idx = static_cast<std::size_t>(sys.index(static_cast<std::int64_t>(rank), 1));
    v[idx] = sys.rhs[idx] / lambda_total;
    solved[idx] = 1;
  }

  std::vector<int> member_col(sys.dim(), -1);
  auto solve_groups = [&](int position) {
    // states sharing the same values from `position` to the end form one
    // block; the monitor block (position 0) has no fixed suffix and spans
    // every state
    std::map<std::vector<int>, std::vector<std::size_t>> groups;
    for (std::size_t rank = 0; rank < n_states; ++rank) {
      std::vector<int> suffix;
      for (int pos = std::max(position, 1); position > 0 && pos <= n; ++pos) {
        suffix.push_back(sys.states[rank].at(pos));
      }
      groups[suffix].push_back(rank);
    }
    const int col_pos = position == 0 ? 0 : position;
    for (const auto& [suffix, members] : groups) {
      T0Block block;
      block.param = position == 0 ? n : position - 1;
      std::vector<double> rhs;
      for (std::size_t li = 0; li < members.size(); ++li) {
        const int col = sys.index(static_cast<std::int64_t>(members[li]), col_pos);
        member_col[static_cast<std::size_t>(col)] = static_cast<int>(li);
      }
      block.cols.resize(members.size());
      for (std::size_t li = 0; li < members.size(); ++li) {
        const std::size_t row_idx =
            static_cast<std::size_t>(sys.index(static_cast<std::int64_t>(members[li]), col_pos));
        std::vector<int> prefix;
        const int prefix_len = position == 0 ? n : position - 1;
        for (int pos = 1; pos <= prefix_len; ++pos) {
          prefix.push_back(sys.states[members[li]].at(pos));
        }
        block.states.emplace_back(std::move(prefix));
        double value = sys.rhs[row_idx];
        for (const auto& [col, val] : sys.rows[row_idx]) {
          const int lc = member_col[static_cast<std::size_t>(col)];
          if (lc >= 0) {
            block.cols[static_cast<std::size_t>(lc)].emplace_back(static_cast<int>(li), val);
          } else {
            if (!solved[static_cast<std::size_t>(col)]) {
              throw Error(ErrorCode::StructureMismatch,
                          "block row references an unsolved variable");
            }
            value -= val * v[static_cast<std::size_t>(col)];
          }
        }
        rhs.push_back(value);
      }
      const std::vector<double> out = solve_block(block, std::move(rhs), nullptr);
      for (std::size_t li = 0; li < members.size(); ++li) {
        const auto idx =
            static_cast<std::size_t>(sys.index(static_cast<std::int64_t>(members[li]), col_pos));
        v[idx] = out[li];
        solved[idx] = 1;
        member_col[idx] = -1;
      }
    }
  };

  for (int position = 2; position <= n; ++position) solve_groups(position);
  solve_groups(0);  // the monitor block, one column per state

  HeteroSolution sol;
  sol.v = std::move(v);
  for (std::size_t rank = 0; rank < n_states; ++rank) {
    sol.aoi += sol.v[static_cast<std::size_t>(sys.index(static_cast<std::int64_t>(rank), 0))];
  }
  return sol;
}

/// Closed form for one source and two heterogeneous servers.
inline double average_age_two_servers(double lambda1, double lambda2, double mu1, double mu2) {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0) || !(mu1 > 0.0) || !(mu2 > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "all four rates must be > 0");
  }
  const double mu = mu1 + mu2;
  const double lam = lambda1 + lambda2;
  return 1.0 / mu + 1.0 / lam +
         (mu1 * lambda2 / (lambda1 + mu2) + mu2 * lambda1 / (lambda2 + mu1)) / (mu * lam);
}

/// Optimal split of a fixed arrival budget across two heterogeneous servers.
/// Interior optima are roots of a quadratic; when one server is fast enough
/// the whole budget goes to it.
inline std::pair<double, double> optimal_split_two_servers(double lambda_total, double mu1,
                                                           double mu2) {
  if (!(lambda_total > 0.0) || !(mu1 > 0.0) || !(mu2 > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "need lambda_total, mu1, mu2 > 0");
  }
  const double lam = lambda_total;
  auto clamp = [lam](double x) { return std::min(lam, std::max(0.0, x)); };
  if (std::fabs(mu1 - mu2) <= 1e-12 * std::max(mu1, mu2)) {
    return {lam / 2.0, lam / 2.0};
  }
  if (mu1 < mu2) {
    if (mu2 * mu2 - mu1 * (lam + mu1) * (lam + mu2) / mu2 >= 0.0) {
      return {0.0, lam};
    }
    const double c = mu1 * (lam + mu2) / (mu2 * (lam + mu1));
    const double root =
        std::sqrt(mu1 * (lam + mu2) * (2.0 + mu2 / (lam + mu1) + (lam + mu1) / mu2));
    const double l1 = (-(mu2 + c * (lam + mu1)) + root) / (1.0 - c);
    return {clamp(l1), clamp(lam - l1)};
  }
  if (mu1 * mu1 - mu2 * (lam + mu1) * (lam + mu2) / mu1 >= 0.0) {
    return {lam, 0.0};
  }
  const double c = mu1 * (lam + mu2) / (mu2 * (lam + mu1));
  const double root =
      std::sqrt(mu2 * (lam + mu1) * (2.0 + mu1 / (lam + mu2) + (lam + mu2) / mu1));
  const double l2 = (-(mu1 + (lam + mu2) / c) + root) / (1.0 - 1.0 / c);
  return {clamp(lam - l2), clamp(l2)};
}

}  // namespace aoi::heterogeneous
