#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "pcstream/pointcloud.hpp"
#include "pcstream/simulator.hpp"
#include "pcstream/splitting.hpp"

namespace pcstream::kernels {

struct KdNode {
    int dim = -1;  // -1 marks a leaf
    float split = 0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint32_t begin = 0;  // leaf bucket: order()[begin, end)
    std::uint32_t end = 0;

    bool is_leaf() const { return dim < 0; }
};

/// Median-split kd-tree. Points with a coordinate equal to a node's split value
/// may sit on either side; the left side holds the lower (coordinate, index) half.
class KdTree {
public:
    KdTree(const PointCloud& cloud, std::size_t leaf_size);

    const std::vector<KdNode>& nodes() const { return nodes_; }
    const std::vector<std::uint32_t>& order() const { return order_; }
    const std::vector<Point>& points() const { return points_; }
    std::size_t leaf_size() const { return leaf_size_; }
    std::size_t depth() const { return depth_; }
    std::size_t size() const { return points_.size(); }

private:
    std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::size_t level);

    std::vector<Point> points_;
    std::vector<std::uint32_t> order_;
    std::vector<KdNode> nodes_;
    std::size_t leaf_size_;
    std::size_t depth_ = 0;
};

KdTree kdtree_build(const PointCloud& cloud, std::size_t leaf_size);

struct Neighbor {
    std::size_t index;
    double dist2;
    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct SearchResult {
    std::vector<Neighbor> neighbors;  // ascending (dist2, index)
    std::int64_t steps_used = 0;      // node visits, the root visit being step 1
    bool truncated = false;
    std::int64_t elided = 0;          // subtrees skipped after a lost bank arbitration
    std::vector<std::uint32_t> visited_leaves;
};

/// Depth-first, nearer child first. With a deadline, stops after that many node visits.
SearchResult knn_search(const KdTree& tree, const Point& query, std::size_t k,
                        std::optional<std::int64_t> deadline = std::nullopt);

/// All points with dist2 <= radius^2.
SearchResult range_search(const KdTree& tree, const Point& query, double radius,
                          std::optional<std::int64_t> deadline = std::nullopt);

std::vector<Neighbor> brute_force_knn(const PointCloud& cloud, const Point& query, std::size_t k);
std::vector<Neighbor> brute_force_range(const PointCloud& cloud, const Point& query, double radius);

/// Fraction of the exact neighbours (by index) present in `found`.
double recall(const std::vector<Neighbor>& found, const std::vector<Neighbor>& exact);

struct StepProfile {
    double mean = 0;
    double stddev = 0;
    std::int64_t max = 0;
    std::int64_t total = 0;
    std::size_t queries = 0;
};

StepProfile profile_steps(const KdTree& tree, const std::vector<Point>& queries, std::size_t k);

/// ceil(fraction * mean uncapped steps), at least 1.
std::int64_t profile_deadline(const KdTree& tree, const std::vector<Point>& queries, std::size_t k, double fraction);

/// Distinct grid cells among the points a search examined.
std::size_t chunks_touched(const ChunkGrid& grid, const KdTree& tree, const SearchResult& result);

/// Mean chunks touched per query for each k.
std::vector<std::pair<std::size_t, double>> chunk_access_stats(const ChunkGrid& grid, const KdTree& tree,
                                                               const std::vector<Point>& queries,
                                                               const std::vector<std::size_t>& ks);

/// Lock-step simulation of concurrent searches over a banked tree (node i lives in
/// bank i mod B). Each cycle every live query requests one node; a query denied by
/// arbitration skips that node's subtree. A denied request still costs a step.
std::vector<SearchResult> knn_search_elide(const KdTree& tree, const std::vector<Point>& queries,
                                           const BankModel& banks, std::size_t k,
                                           std::optional<std::int64_t> deadline = std::nullopt);

}  // namespace pcstream::kernels
