/**
 * @file set_cover.hpp
 *
 * Minimum set cover over small universes: a greedy heuristic and an exact
 * branch-and-bound seeded with it. Also maximal-clique enumeration, which
 * turns "subsets of diameter <= a" into a finite family of candidate sets.
 */
#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace arc {

/// Fixed-size bitset with a runtime size.
class Bitset {
public:
    Bitset() = default;
    explicit Bitset(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}

    static Bitset full(std::size_t n) {
        Bitset b(n);
        for (std::size_t i = 0; i < n; ++i) b.set(i);
        return b;
    }

    std::size_t size() const { return n_; }
    void set(std::size_t i) { w_[i / 64] |= std::uint64_t{1} << (i % 64); }
    void reset(std::size_t i) { w_[i / 64] &= ~(std::uint64_t{1} << (i % 64)); }
    bool test(std::size_t i) const { return (w_[i / 64] >> (i % 64)) & 1U; }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto w : w_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }
    bool any() const {
        return std::any_of(w_.begin(), w_.end(), [](std::uint64_t w) { return w != 0; });
    }
    bool none() const { return !any(); }

    std::size_t count_and(const Bitset& o) const {
        std::size_t c = 0;
        for (std::size_t k = 0; k < w_.size(); ++k) c += static_cast<std::size_t>(std::popcount(w_[k] & o.w_[k]));
        return c;
    }
    bool subset_of(const Bitset& o) const {
        for (std::size_t k = 0; k < w_.size(); ++k)
            if (w_[k] & ~o.w_[k]) return false;
        return true;
    }
    Bitset& operator&=(const Bitset& o) {
        for (std::size_t k = 0; k < w_.size(); ++k) w_[k] &= o.w_[k];
        return *this;
    }
    Bitset& operator|=(const Bitset& o) {
        for (std::size_t k = 0; k < w_.size(); ++k) w_[k] |= o.w_[k];
        return *this;
    }
    Bitset& subtract(const Bitset& o) {
        for (std::size_t k = 0; k < w_.size(); ++k) w_[k] &= ~o.w_[k];
        return *this;
    }
    friend Bitset operator&(Bitset a, const Bitset& b) { return a &= b; }
    friend bool operator==(const Bitset&, const Bitset&) = default;

    /// Lowest set index, or size() if empty.
    std::size_t first() const {
        for (std::size_t k = 0; k < w_.size(); ++k)
            if (w_[k]) return k * 64 + static_cast<std::size_t>(std::countr_zero(w_[k]));
        return n_;
    }

    template <typename F>
    void for_each(F&& f) const {
        for (std::size_t k = 0; k < w_.size(); ++k) {
            std::uint64_t w = w_[k];
            while (w) {
                f(k * 64 + static_cast<std::size_t>(std::countr_zero(w)));
                w &= w - 1;
            }
        }
    }

    std::vector<std::size_t> indices() const {
        std::vector<std::size_t> out;
        for_each([&](std::size_t i) { out.push_back(i); });
        return out;
    }

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> w_;
};

struct SetCoverSolution {
    std::vector<std::size_t> chosen;  // indices into the candidate family, ascending
    bool exact = false;
    std::size_t nodes = 0;
};

/// Repeatedly take the set covering the most uncovered elements; ties go to
/// the lowest set index.
inline SetCoverSolution greedy_set_cover(std::size_t universe, const std::vector<Bitset>& sets) {
    Bitset uncovered = Bitset::full(universe);
    SetCoverSolution sol;
    while (uncovered.any()) {
        std::size_t best = sets.size(), gain = 0;
        for (std::size_t s = 0; s < sets.size(); ++s) {
            const std::size_t g = sets[s].count_and(uncovered);
            if (g > gain) gain = g, best = s;
        }
        if (best == sets.size()) throw std::invalid_argument("set cover: family does not cover the universe");
        sol.chosen.push_back(best);
        uncovered.subtract(sets[best]);
    }
    std::sort(sol.chosen.begin(), sol.chosen.end());
    return sol;
}

namespace detail {

class CoverSearch {
public:
    CoverSearch(std::size_t universe, const std::vector<Bitset>& sets, std::size_t budget)
        : sets_(sets), budget_(budget), containing_(universe) {
        for (std::size_t s = 0; s < sets.size(); ++s) sets[s].for_each([&](std::size_t e) { containing_[e].push_back(s); });
    }

    bool run(const Bitset& uncovered, std::vector<std::size_t>& best) {
        best_ = best;
        std::vector<std::size_t> stack;
        recurse(uncovered, stack);
        best = best_;
        return !exhausted_;
    }

    std::size_t nodes() const { return nodes_; }

private:
    void recurse(const Bitset& uncovered, std::vector<std::size_t>& stack) {
        if (exhausted_) return;
        if (++nodes_ > budget_) {
            exhausted_ = true;
            return;
        }
        if (uncovered.none()) {
            if (stack.size() < best_.size()) best_ = stack;
            return;
        }
        const std::size_t left = uncovered.count();
        std::size_t widest = 0;
        for (const auto& s : sets_) widest = std::max(widest, s.count_and(uncovered));
        if (widest == 0) return;
        const std::size_t lower = (left + widest - 1) / widest;
        if (stack.size() + lower >= best_.size()) return;

        // Branch on the uncovered element with the fewest candidate sets.
        std::size_t pivot = uncovered.size(), fewest = ~std::size_t{0};
        uncovered.for_each([&](std::size_t e) {
            if (containing_[e].size() < fewest) fewest = containing_[e].size(), pivot = e;
        });
        std::vector<std::pair<std::size_t, std::size_t>> order;  // (-gain, set)
        for (std::size_t s : containing_[pivot]) order.emplace_back(sets_[s].count_and(uncovered), s);
        std::stable_sort(order.begin(), order.end(), [](auto a, auto b) { return a.first > b.first; });
        for (auto [gain, s] : order) {
            Bitset next = uncovered;
            next.subtract(sets_[s]);
            stack.push_back(s);
            recurse(next, stack);
            stack.pop_back();
            if (exhausted_) return;
        }
    }

    const std::vector<Bitset>& sets_;
    std::size_t budget_;
    std::vector<std::vector<std::size_t>> containing_;
    std::vector<std::size_t> best_;
    std::size_t nodes_ = 0;
    bool exhausted_ = false;
};

}  // namespace detail

/**
 * Minimum-cardinality cover of {0..universe-1} by members of `sets`.
 * Branch-and-bound with the greedy solution as incumbent. If the node budget
 * runs out the best cover found so far is returned with exact = false.
 * Deterministic: the traversal order fixes tie-breaking.
 */
inline SetCoverSolution exact_set_cover(std::size_t universe, const std::vector<Bitset>& sets,
                                        std::size_t node_budget = 1'000'000) {
    SetCoverSolution sol = greedy_set_cover(universe, sets);
    detail::CoverSearch search(universe, sets, node_budget);
    std::vector<std::size_t> best = sol.chosen;
    sol.exact = search.run(Bitset::full(universe), best);
    sol.nodes = search.nodes();
    std::sort(best.begin(), best.end());
    sol.chosen = std::move(best);
    return sol;
}

/**
 * All maximal cliques of an undirected graph given by adjacency bitsets
 * (Bron-Kerbosch with pivoting). Cliques are returned as bitsets sorted by
 * their member lists, lexicographically.
 */
inline std::vector<Bitset> maximal_cliques(const std::vector<Bitset>& adj) {
    const std::size_t n = adj.size();
    std::vector<Bitset> out;
    std::function<void(Bitset, Bitset, Bitset)> bk = [&](Bitset r, Bitset p, Bitset x) {
        if (p.none() && x.none()) {
            out.push_back(std::move(r));
            return;
        }
        Bitset px = p;
        px |= x;
        std::size_t pivot = n, most = 0;
        px.for_each([&](std::size_t u) {
            const std::size_t c = adj[u].count_and(p);
            if (pivot == n || c > most) pivot = u, most = c;
        });
        Bitset cand = p;
        cand.subtract(adj[pivot]);
        cand.for_each([&](std::size_t v) {
            Bitset r2 = r;
            r2.set(v);
            bk(r2, p & adj[v], x & adj[v]);
            p.reset(v);
            x.set(v);
        });
    };
    bk(Bitset(n), Bitset::full(n), Bitset(n));
    std::sort(out.begin(), out.end(), [](const Bitset& a, const Bitset& b) { return a.indices() < b.indices(); });
    return out;
}

}  // namespace arc
