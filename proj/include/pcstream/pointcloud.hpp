#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pcstream::kernels {

using Point = std::array<float, 3>;

/// Points in arrival order, with optional per-point attribute rows.
struct PointCloud {
    std::vector<Point> points;
    std::vector<std::vector<float>> attributes;  // empty, or one row per point

    std::size_t size() const { return points.size(); }
};

/// Throws std::invalid_argument on an empty cloud or a non-finite coordinate.
void validate(const PointCloud& cloud);

struct Bounds {
    Point lo;
    Point hi;
};

Bounds bounding_box(const PointCloud& cloud);

/// Squared Euclidean distance, evaluated in double.
inline double squared_distance(const Point& a, const Point& b) {
    double s = 0;
    for (int d = 0; d < 3; ++d) {
        const double diff = static_cast<double>(a[d]) - static_cast<double>(b[d]);
        s += diff * diff;
    }
    return s;
}

enum class CloudFormat { Text, Binary };

/// Text: one "x y z [attrs...]" per line; blank lines and '#' comments skipped.
/// Binary: little-endian uint32 count, then count float32 triples.
PointCloud read_cloud(std::istream& in, CloudFormat format);
void write_cloud(std::ostream& out, const PointCloud& cloud, CloudFormat format);
PointCloud load_cloud(const std::string& path, CloudFormat format);
void save_cloud(const std::string& path, const PointCloud& cloud, CloudFormat format);

/// n points uniform in the unit cube.
PointCloud uniform_cloud(std::size_t n, std::uint64_t seed);

/// Spinning-scanner stand-in: `rings` elevation rings swept in azimuth order,
/// so consecutive points are spatial neighbours, as a LiDAR emits them.
PointCloud scan_cloud(std::size_t rings, std::size_t points_per_ring, std::uint64_t seed);

}  // namespace pcstream::kernels
