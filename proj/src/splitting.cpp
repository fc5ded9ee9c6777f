#include "pcstream/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pcstream::kernels {

Triple ChunkGrid::cell_coords(std::size_t index) const {
    return {index % dims[0], (index / dims[0]) % dims[1], index / (dims[0] * dims[1])};
}

std::size_t ChunkGrid::locate(const Point& p) const {
    Triple c{};
    for (int d = 0; d < 3; ++d) {
        const double extent = static_cast<double>(bbox.hi[d]) - static_cast<double>(bbox.lo[d]);
        if (dims[d] == 1 || extent <= 0) continue;
        const double t = (static_cast<double>(p[d]) - static_cast<double>(bbox.lo[d])) / extent * static_cast<double>(dims[d]);
        const double cell = std::ceil(t) - 1;
        c[d] = static_cast<std::size_t>(std::clamp(cell, 0.0, static_cast<double>(dims[d] - 1)));
    }
    return cell_index(c);
}

Triple ChunkGrid::group_dims() const {
    Triple g{};
    for (int d = 0; d < 3; ++d) g[d] = (dims[d] - kernel[d]) / stride[d] + 1;
    return g;
}

std::size_t ChunkGrid::group_count() const {
    const auto g = group_dims();
    return g[0] * g[1] * g[2];
}

std::vector<std::size_t> ChunkGrid::group_cells(std::size_t group) const {
    const auto g = group_dims();
    if (group >= group_count()) throw std::out_of_range("chunk group " + std::to_string(group) + " out of range");
    const Triple origin{(group % g[0]) * stride[0], ((group / g[0]) % g[1]) * stride[1], (group / (g[0] * g[1])) * stride[2]};
    std::vector<std::size_t> out;
    for (std::size_t z = 0; z < kernel[2]; ++z)
        for (std::size_t y = 0; y < kernel[1]; ++y)
            for (std::size_t x = 0; x < kernel[0]; ++x) out.push_back(cell_index({origin[0] + x, origin[1] + y, origin[2] + z}));
    return out;
}

std::vector<std::size_t> ChunkGrid::group_points(std::size_t group) const {
    std::vector<std::size_t> out;
    for (std::size_t c : group_cells(group)) out.insert(out.end(), cells[c].begin(), cells[c].end());
    std::sort(out.begin(), out.end());
    return out;
}

ChunkGrid split_grid(const PointCloud& cloud, Triple dims, Triple kernel, Triple stride) {
    ChunkGrid grid;
    grid.bbox = bounding_box(cloud);
    for (int d = 0; d < 3; ++d) {
        if (dims[d] < 1) throw std::invalid_argument("grid dimensions must be positive");
        if (kernel[d] < 1 || kernel[d] > dims[d]) throw std::invalid_argument("kernel must lie within 1..dims on every axis");
        if (stride[d] < 1) throw std::invalid_argument("stride must be positive");
        if (grid.bbox.hi[d] == grid.bbox.lo[d]) {
            dims[d] = 1;
            kernel[d] = 1;
        }
    }
    grid.dims = dims;
    grid.kernel = kernel;
    grid.stride = stride;
    grid.cells.assign(dims[0] * dims[1] * dims[2], {});
    grid.cell_of_point.resize(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const std::size_t c = grid.locate(cloud.points[i]);
        grid.cell_of_point[i] = c;
        grid.cells[c].push_back(i);
    }
    return grid;
}

std::vector<SerialChunk> split_serial(const PointCloud& cloud, std::size_t points_per_chunk) {
    if (points_per_chunk < 1) throw std::invalid_argument("points per chunk must be at least 1");
    std::vector<SerialChunk> chunks;
    for (std::size_t begin = 0; begin < cloud.size(); begin += points_per_chunk)
        chunks.push_back({begin, std::min(cloud.size(), begin + points_per_chunk)});
    return chunks;
}

namespace {

void sort_by_axis(const PointCloud& cloud, int axis, std::vector<std::size_t>& idx) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const float ca = cloud.points[a][axis], cb = cloud.points[b][axis];
        return ca < cb || (ca == cb && a < b);
    });
}

void check_axis(int axis) {
    if (axis < 0 || axis > 2) throw std::invalid_argument("axis must be 0, 1 or 2");
}

}  // namespace

std::vector<std::size_t> chunked_sort(const PointCloud& cloud, int axis, const std::vector<float>& boundaries) {
    check_axis(axis);
    if (!std::is_sorted(boundaries.begin(), boundaries.end()))
        throw std::invalid_argument("chunk boundaries must be ascending");
    std::vector<std::vector<std::size_t>> buckets(boundaries.size() + 1);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto slot = std::upper_bound(boundaries.begin(), boundaries.end(), cloud.points[i][axis]) - boundaries.begin();
        buckets[static_cast<std::size_t>(slot)].push_back(i);
    }
    std::vector<std::size_t> out;
    out.reserve(cloud.size());
    for (auto& bucket : buckets) {
        sort_by_axis(cloud, axis, bucket);
        out.insert(out.end(), bucket.begin(), bucket.end());
    }
    return out;
}

std::vector<std::size_t> global_sort(const PointCloud& cloud, int axis) {
    check_axis(axis);
    std::vector<std::size_t> idx(cloud.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    sort_by_axis(cloud, axis, idx);
    return idx;
}

std::vector<float> even_boundaries(const PointCloud& cloud, int axis, std::size_t parts) {
    check_axis(axis);
    if (parts < 1) throw std::invalid_argument("need at least one partition");
    const auto box = bounding_box(cloud);
    const double lo = box.lo[axis], hi = box.hi[axis];
    std::vector<float> cuts;
    for (std::size_t i = 1; i < parts; ++i)
        cuts.push_back(static_cast<float>(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(parts)));
    return cuts;
}

}  // namespace pcstream::kernels
