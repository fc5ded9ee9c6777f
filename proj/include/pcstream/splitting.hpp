#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "pcstream/pointcloud.hpp"

namespace pcstream::kernels {

using Triple = std::array<std::size_t, 3>;

/// Uniform cell grid over a cloud's bounding box, plus the chunk groups formed
/// by sliding a kernel of cells over the grid.
struct ChunkGrid {
    Bounds bbox;
    Triple dims;
    Triple kernel;
    Triple stride;
    std::vector<std::vector<std::size_t>> cells;  // point indices per cell, x fastest
    std::vector<std::size_t> cell_of_point;

    std::size_t cell_count() const { return cells.size(); }
    std::size_t cell_index(const Triple& c) const { return c[0] + dims[0] * (c[1] + dims[1] * c[2]); }
    Triple cell_coords(std::size_t index) const;
    /// Cell a coordinate falls in; cell boundaries belong to the lower cell.
    std::size_t locate(const Point& p) const;

    Triple group_dims() const;
    std::size_t group_count() const;
    std::vector<std::size_t> group_cells(std::size_t group) const;
    std::vector<std::size_t> group_points(std::size_t group) const;
};

/// Throws std::invalid_argument unless dims >= 1, 1 <= kernel <= dims and stride >= 1.
/// An axis with zero extent collapses to one cell and a kernel of one.
ChunkGrid split_grid(const PointCloud& cloud, Triple dims, Triple kernel = {1, 1, 1}, Triple stride = {1, 1, 1});

struct SerialChunk {
    std::size_t begin;
    std::size_t end;  // exclusive
    std::size_t size() const { return end - begin; }
};

/// Consecutive runs of `points_per_chunk` points in arrival order.
std::vector<SerialChunk> split_serial(const PointCloud& cloud, std::size_t points_per_chunk);

/// Buckets points by the half-open intervals [b_i, b_i+1) along `axis`, sorts each
/// bucket by (coordinate, index) and concatenates the buckets. Boundaries must be ascending.
std::vector<std::size_t> chunked_sort(const PointCloud& cloud, int axis, const std::vector<float>& boundaries);

/// Reference: the whole cloud ordered by (coordinate, index).
std::vector<std::size_t> global_sort(const PointCloud& cloud, int axis);

/// `parts` equal-width slabs over the cloud's extent along `axis`.
std::vector<float> even_boundaries(const PointCloud& cloud, int axis, std::size_t parts);

}  // namespace pcstream::kernels
