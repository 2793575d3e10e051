#pragma once

#include <algorithm>
#include <cstdint>
#include <queue>
#include <vector>

#include "kmac/common.hpp"

namespace kmac {

namespace detail {

struct Cand {
    double d2;
    std::uint64_t key;
    std::uint32_t idx;
    // "closer" ordering; the search keeps a max-heap under it
    bool operator<(const Cand& o) const {
        if (d2 != o.d2) return d2 < o.d2;
        if (key != o.key) return key < o.key;
        return idx < o.idx;
    }
};

}  // namespace detail

// Exact k-nearest-neighbor search.  Candidates are ordered by
// (squared distance, tie_key, index); subtrees are pruned only when their
// box distance strictly exceeds the current k-th squared distance, so
// equidistant candidates are always examined and tie handling is exact.
class KdTree {
public:
    explicit KdTree(const DataMatrix& pts) : pts_(pts), d_(pts.cols()) {
        const std::size_t n = pts.rows();
        order_.resize(n);
        for (std::size_t i = 0; i < n; ++i) order_[i] = static_cast<std::uint32_t>(i);
        nodes_.reserve(2 * n / kLeafSize + 2);
        root_ = build(0, static_cast<std::uint32_t>(n));
    }

    // tie_key(j) gives a total order among equidistant candidates; the
    // returned indices exclude `query` and come sorted by
    // (sqdist, tie_key, index).
    template <class TieKey>
    std::vector<std::uint32_t> query_knn(std::size_t query, std::size_t k,
                                         TieKey&& tie_key) const {
        const double* q = pts_.row(query);
        std::priority_queue<detail::Cand> heap;  // top = worst kept candidate
        search(root_, q, k, query, tie_key, heap);
        std::vector<detail::Cand> got;
        got.reserve(heap.size());
        while (!heap.empty()) {
            got.push_back(heap.top());
            heap.pop();
        }
        std::vector<std::uint32_t> out(got.size());
        for (std::size_t i = 0; i < got.size(); ++i)
            out[got.size() - 1 - i] = got[i].idx;
        return out;
    }

private:
    struct Node {
        std::uint32_t begin = 0, end = 0;  // leaf range into order_
        std::int32_t left = -1, right = -1;
        std::vector<double> box_lo, box_hi;
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end) {
        Node nd;
        nd.begin = begin;
        nd.end = end;
        nd.box_lo.assign(d_, 0.0);
        nd.box_hi.assign(d_, 0.0);
        for (std::size_t dim = 0; dim < d_; ++dim) {
            double lo = pts_.at(order_[begin], dim), hi = lo;
            for (std::uint32_t t = begin + 1; t < end; ++t) {
                const double v = pts_.at(order_[t], dim);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            nd.box_lo[dim] = lo;
            nd.box_hi[dim] = hi;
        }
        const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back(std::move(nd));
        if (end - begin <= kLeafSize) return id;

        // split the widest dimension at the median
        std::size_t dim = 0;
        double width = -1.0;
        for (std::size_t k = 0; k < d_; ++k) {
            const double w = nodes_[id].box_hi[k] - nodes_[id].box_lo[k];
            if (w > width) {
                width = w;
                dim = k;
            }
        }
        if (width <= 0.0) return id;  // all points identical: keep as leaf
        const std::uint32_t mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid,
                         order_.begin() + end, [&](std::uint32_t a, std::uint32_t b) {
                             const double va = pts_.at(a, dim), vb = pts_.at(b, dim);
                             if (va != vb) return va < vb;
                             return a < b;
                         });
        const std::int32_t l = build(begin, mid);
        const std::int32_t r = build(mid, end);
        nodes_[id].left = l;
        nodes_[id].right = r;
        return id;
    }

    double box_sqdist(const Node& nd, const double* q) const {
        double s = 0.0;
        for (std::size_t dim = 0; dim < d_; ++dim) {
            double t = 0.0;
            if (q[dim] < nd.box_lo[dim])
                t = nd.box_lo[dim] - q[dim];
            else if (q[dim] > nd.box_hi[dim])
                t = q[dim] - nd.box_hi[dim];
            s += t * t;
        }
        return s;
    }

    template <class TieKey>
    void search(std::int32_t node, const double* q, std::size_t k, std::size_t query,
                TieKey& tie_key, std::priority_queue<detail::Cand>& heap) const {
        const Node& nd = nodes_[node];
        if (heap.size() == k && box_sqdist(nd, q) > heap.top().d2) return;
        if (nd.left < 0) {
            for (std::uint32_t t = nd.begin; t < nd.end; ++t) {
                const std::uint32_t j = order_[t];
                if (j == query) continue;
                const double d2 = sq_dist(q, pts_.row(j), d_);
                if (heap.size() < k) {
                    heap.push({d2, tie_key(j), j});
                } else {
                    detail::Cand c{d2, tie_key(j), j};
                    if (c < heap.top()) {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            return;
        }
        // descend toward the query side first
        const double dl = box_sqdist(nodes_[nd.left], q);
        const double dr = box_sqdist(nodes_[nd.right], q);
        if (dl <= dr) {
            search(nd.left, q, k, query, tie_key, heap);
            if (heap.size() < k || dr <= heap.top().d2)
                search(nd.right, q, k, query, tie_key, heap);
        } else {
            search(nd.right, q, k, query, tie_key, heap);
            if (heap.size() < k || dl <= heap.top().d2)
                search(nd.left, q, k, query, tie_key, heap);
        }
    }

    const DataMatrix& pts_;
    std::size_t d_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
    std::int32_t root_ = -1;

    static constexpr std::uint32_t kLeafSize = 16;
};

}  // namespace kmac
