#include "pcstream/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace pcstream::kernels {

KdTree::KdTree(const PointCloud& cloud, std::size_t leaf_size) : points_(cloud.points), leaf_size_(leaf_size) {
    validate(cloud);
    if (leaf_size < 1) throw std::invalid_argument("leaf size must be at least 1");
    if (cloud.size() > std::numeric_limits<std::uint32_t>::max()) throw std::invalid_argument("too many points");
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), std::uint32_t{0});
    build(0, static_cast<std::uint32_t>(order_.size()), 0);
}

std::uint32_t KdTree::build(std::uint32_t begin, std::uint32_t end, std::size_t level) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    depth_ = std::max(depth_, level);
    if (end - begin <= leaf_size_) {
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        return id;
    }

    Point lo = points_[order_[begin]], hi = lo;
    for (auto i = begin; i < end; ++i)
        for (int d = 0; d < 3; ++d) {
            lo[d] = std::min(lo[d], points_[order_[i]][d]);
            hi[d] = std::max(hi[d], points_[order_[i]][d]);
        }
    int dim = 0;
    for (int d = 1; d < 3; ++d)
        if (static_cast<double>(hi[d]) - lo[d] > static_cast<double>(hi[dim]) - lo[dim]) dim = d;

    const auto mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         const float ca = points_[a][dim], cb = points_[b][dim];
                         return ca < cb || (ca == cb && a < b);
                     });
    const float split = points_[order_[mid]][dim];
    const auto left = build(begin, mid, level + 1);
    const auto right = build(mid, end, level + 1);
    auto& node = nodes_[id];
    node.dim = dim;
    node.split = split;
    node.left = left;
    node.right = right;
    node.begin = begin;
    node.end = end;
    return id;
}

KdTree kdtree_build(const PointCloud& cloud, std::size_t leaf_size) { return KdTree(cloud, leaf_size); }

namespace {

bool closer(const Neighbor& a, const Neighbor& b) { return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index); }

/// Resumable depth-first search. A caller asks for the next node worth visiting,
/// then either visits it or skips its subtree.
class Traversal {
public:
    Traversal(const KdTree& tree, const Point& query, std::size_t k, double radius2)
        : tree_(tree), query_(query), k_(k), radius2_(radius2) {
        stack_.push_back({0, 0.0});
    }

    std::optional<std::uint32_t> next() {
        while (!stack_.empty()) {
            if (!prunable(stack_.back().bound)) return stack_.back().node;
            stack_.pop_back();
        }
        return std::nullopt;
    }

    void visit() {
        const auto [id, bound] = stack_.back();
        stack_.pop_back();
        const auto& node = tree_.nodes()[id];
        if (node.is_leaf()) {
            result_.visited_leaves.push_back(id);
            for (auto i = node.begin; i < node.end; ++i) offer(tree_.order()[i]);
            return;
        }
        const double diff = static_cast<double>(query_[node.dim]) - static_cast<double>(node.split);
        const auto near = diff < 0 ? node.left : node.right;
        const auto far = diff < 0 ? node.right : node.left;
        stack_.push_back({far, std::max(bound, diff * diff)});
        stack_.push_back({near, bound});
    }

    void skip() {
        stack_.pop_back();
        ++result_.elided;
    }

    SearchResult finish(std::int64_t steps, bool truncated) {
        if (k_ > 0) std::sort_heap(result_.neighbors.begin(), result_.neighbors.end(), closer);
        else std::sort(result_.neighbors.begin(), result_.neighbors.end(), closer);
        result_.steps_used = steps;
        result_.truncated = truncated;
        return std::move(result_);
    }

private:
    struct Entry {
        std::uint32_t node;
        double bound;  // lower bound on dist2 to anything in the subtree
    };

    bool range_mode() const { return k_ == 0; }

    bool prunable(double bound) const {
        if (range_mode()) return bound > radius2_;
        const auto& heap = result_.neighbors;
        return heap.size() == k_ && bound > heap.front().dist2;
    }

    void offer(std::size_t index) {
        const Neighbor cand{index, squared_distance(tree_.points()[index], query_)};
        auto& heap = result_.neighbors;
        if (range_mode()) {
            if (cand.dist2 <= radius2_) heap.push_back(cand);
        } else if (heap.size() < k_) {
            heap.push_back(cand);
            std::push_heap(heap.begin(), heap.end(), closer);
        } else if (closer(cand, heap.front())) {
            std::pop_heap(heap.begin(), heap.end(), closer);
            heap.back() = cand;
            std::push_heap(heap.begin(), heap.end(), closer);
        }
    }

    const KdTree& tree_;
    Point query_;
    std::size_t k_;
    double radius2_;
    std::vector<Entry> stack_;
    SearchResult result_;
};

void check_deadline(const std::optional<std::int64_t>& deadline) {
    if (deadline && *deadline < 1) throw std::invalid_argument("deadline must be at least 1 step");
}

SearchResult run(Traversal traversal, const std::optional<std::int64_t>& deadline) {
    std::int64_t steps = 0;
    while (traversal.next()) {
        if (deadline && steps == *deadline) return traversal.finish(steps, true);
        traversal.visit();
        ++steps;
    }
    return traversal.finish(steps, false);
}

}  // namespace

SearchResult knn_search(const KdTree& tree, const Point& query, std::size_t k, std::optional<std::int64_t> deadline) {
    if (k < 1) throw std::invalid_argument("k must be at least 1");
    check_deadline(deadline);
    return run(Traversal(tree, query, k, 0), deadline);
}

SearchResult range_search(const KdTree& tree, const Point& query, double radius, std::optional<std::int64_t> deadline) {
    if (!(radius > 0)) throw std::invalid_argument("radius must be positive");
    check_deadline(deadline);
    return run(Traversal(tree, query, 0, radius * radius), deadline);
}

std::vector<Neighbor> brute_force_knn(const PointCloud& cloud, const Point& query, std::size_t k) {
    std::vector<Neighbor> all;
    all.reserve(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) all.push_back({i, squared_distance(cloud.points[i], query)});
    const auto keep = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), closer);
    all.resize(keep);
    return all;
}

std::vector<Neighbor> brute_force_range(const PointCloud& cloud, const Point& query, double radius) {
    const double r2 = radius * radius;
    std::vector<Neighbor> out;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const double d = squared_distance(cloud.points[i], query);
        if (d <= r2) out.push_back({i, d});
    }
    std::sort(out.begin(), out.end(), closer);
    return out;
}

double recall(const std::vector<Neighbor>& found, const std::vector<Neighbor>& exact) {
    if (exact.empty()) return 1.0;
    std::unordered_set<std::size_t> got;
    for (const auto& n : found) got.insert(n.index);
    std::size_t hits = 0;
    for (const auto& n : exact) hits += got.count(n.index);
    return static_cast<double>(hits) / static_cast<double>(exact.size());
}

StepProfile profile_steps(const KdTree& tree, const std::vector<Point>& queries, std::size_t k) {
    if (queries.empty()) throw std::invalid_argument("no queries to profile");
    StepProfile p;
    p.queries = queries.size();
    double sq = 0;
    for (const auto& q : queries) {
        const auto steps = knn_search(tree, q, k).steps_used;
        p.total += steps;
        p.max = std::max(p.max, steps);
        sq += static_cast<double>(steps) * static_cast<double>(steps);
    }
    const double n = static_cast<double>(p.queries);
    p.mean = static_cast<double>(p.total) / n;
    p.stddev = std::sqrt(std::max(0.0, sq / n - p.mean * p.mean));
    return p;
}

std::int64_t profile_deadline(const KdTree& tree, const std::vector<Point>& queries, std::size_t k, double fraction) {
    if (!(fraction > 0 && fraction <= 1)) throw std::invalid_argument("deadline fraction must lie in (0, 1]");
    const auto p = profile_steps(tree, queries, k);
    const double target = fraction * static_cast<double>(p.total) / static_cast<double>(p.queries);
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(target - 1e-9)));
}

std::size_t chunks_touched(const ChunkGrid& grid, const KdTree& tree, const SearchResult& result) {
    std::unordered_set<std::size_t> cells;
    for (auto leaf : result.visited_leaves) {
        const auto& node = tree.nodes()[leaf];
        for (auto i = node.begin; i < node.end; ++i) cells.insert(grid.cell_of_point.at(tree.order()[i]));
    }
    return cells.size();
}

std::vector<std::pair<std::size_t, double>> chunk_access_stats(const ChunkGrid& grid, const KdTree& tree,
                                                               const std::vector<Point>& queries,
                                                               const std::vector<std::size_t>& ks) {
    if (grid.cell_of_point.size() != tree.size()) throw std::invalid_argument("grid and tree cover different clouds");
    if (queries.empty()) throw std::invalid_argument("no queries");
    std::vector<std::pair<std::size_t, double>> out;
    for (auto k : ks) {
        std::size_t total = 0;
        for (const auto& q : queries) total += chunks_touched(grid, tree, knn_search(tree, q, k));
        out.emplace_back(k, static_cast<double>(total) / static_cast<double>(queries.size()));
    }
    return out;
}

std::vector<SearchResult> knn_search_elide(const KdTree& tree, const std::vector<Point>& queries, const BankModel& banks,
                                           std::size_t k, std::optional<std::int64_t> deadline) {
    if (k < 1) throw std::invalid_argument("k must be at least 1");
    if (queries.empty()) throw std::invalid_argument("no queries");
    if (banks.bank_count < 1) throw std::invalid_argument("bank count must be positive");
    check_deadline(deadline);

    std::vector<Traversal> walks;
    walks.reserve(queries.size());
    for (const auto& q : queries) walks.emplace_back(tree, q, k, 0);
    std::vector<std::int64_t> steps(queries.size(), 0);
    std::vector<std::optional<SearchResult>> done(queries.size());
    std::size_t live = queries.size();

    while (live > 0) {
        std::vector<std::optional<std::int64_t>> requests(queries.size());
        for (std::size_t i = 0; i < walks.size(); ++i) {
            if (done[i]) continue;
            const auto node = walks[i].next();
            if (!node || (deadline && steps[i] == *deadline)) {
                done[i] = walks[i].finish(steps[i], node.has_value());
                --live;
                continue;
            }
            requests[i] = *node;
        }
        const auto granted = arbitrate(requests, banks);
        for (std::size_t i = 0; i < walks.size(); ++i) {
            if (!requests[i]) continue;
            if (granted[i]) walks[i].visit();
            else walks[i].skip();
            ++steps[i];
        }
    }

    std::vector<SearchResult> out;
    out.reserve(done.size());
    for (auto& r : done) out.push_back(std::move(*r));
    return out;
}

}  // namespace pcstream::kernels
