#include "pcstream/pointcloud.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

namespace pcstream::kernels {

namespace {

float unit_float(std::mt19937_64& rng) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return static_cast<float>(u);
}

std::uint32_t to_little(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::big) return __builtin_bswap32(v);
    return v;
}

void put_u32(std::ostream& out, std::uint32_t v) {
    v = to_little(v);
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(std::istream& in) {
    std::uint32_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw std::runtime_error("truncated binary point cloud");
    return to_little(v);
}

std::string format_float(float v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

void validate(const PointCloud& cloud) {
    if (cloud.points.empty()) throw std::invalid_argument("point cloud is empty");
    for (std::size_t i = 0; i < cloud.points.size(); ++i)
        for (float c : cloud.points[i])
            if (!std::isfinite(c)) throw std::invalid_argument("point " + std::to_string(i) + " has a non-finite coordinate");
    if (!cloud.attributes.empty() && cloud.attributes.size() != cloud.points.size())
        throw std::invalid_argument("attribute rows do not match point count");
}

Bounds bounding_box(const PointCloud& cloud) {
    validate(cloud);
    Bounds b{cloud.points[0], cloud.points[0]};
    for (const auto& p : cloud.points) {
        for (int d = 0; d < 3; ++d) {
            b.lo[d] = std::min(b.lo[d], p[d]);
            b.hi[d] = std::max(b.hi[d], p[d]);
        }
    }
    return b;
}

PointCloud read_cloud(std::istream& in, CloudFormat format) {
    PointCloud cloud;
    if (format == CloudFormat::Binary) {
        const std::uint32_t count = get_u32(in);
        cloud.points.resize(count);
        for (auto& p : cloud.points) {
            for (auto& c : p) {
                const std::uint32_t bits = get_u32(in);
                std::memcpy(&c, &bits, sizeof c);
            }
        }
        validate(cloud);
        return cloud;
    }

    std::string line;
    std::size_t line_no = 0;
    bool any_attrs = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::vector<float> values;
        const char* p = line.data();
        const char* end = p + line.size();
        for (;;) {
            while (p < end && std::isspace(static_cast<unsigned char>(*p))) ++p;
            if (p == end || *p == '#') break;
            float v = 0;
            const auto res = std::from_chars(p, end, v);
            if (res.ec != std::errc())
                throw std::runtime_error("line " + std::to_string(line_no) + ": not a number near '" +
                                         std::string(p, std::min<std::size_t>(12, static_cast<std::size_t>(end - p))) + "'");
            values.push_back(v);
            p = res.ptr;
        }
        if (values.empty()) continue;
        if (values.size() < 3) throw std::runtime_error("line " + std::to_string(line_no) + ": expected x y z");
        cloud.points.push_back({values[0], values[1], values[2]});
        cloud.attributes.emplace_back(values.begin() + 3, values.end());
        any_attrs = any_attrs || values.size() > 3;
    }
    if (!any_attrs) cloud.attributes.clear();
    validate(cloud);
    return cloud;
}

void write_cloud(std::ostream& out, const PointCloud& cloud, CloudFormat format) {
    if (format == CloudFormat::Binary) {
        if (cloud.points.size() > UINT32_MAX) throw std::invalid_argument("too many points for the binary format");
        put_u32(out, static_cast<std::uint32_t>(cloud.points.size()));
        for (const auto& p : cloud.points) {
            for (float c : p) {
                std::uint32_t bits;
                std::memcpy(&bits, &c, sizeof bits);
                put_u32(out, bits);
            }
        }
        return;
    }
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const auto& p = cloud.points[i];
        out << format_float(p[0]) << ' ' << format_float(p[1]) << ' ' << format_float(p[2]);
        if (!cloud.attributes.empty())
            for (float a : cloud.attributes[i]) out << ' ' << format_float(a);
        out << '\n';
    }
}

PointCloud load_cloud(const std::string& path, CloudFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open point cloud '" + path + "'");
    return read_cloud(in, format);
}

void save_cloud(const std::string& path, const PointCloud& cloud, CloudFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write point cloud '" + path + "'");
    write_cloud(out, cloud, format);
}

PointCloud uniform_cloud(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    PointCloud cloud;
    cloud.points.resize(n);
    for (auto& p : cloud.points)
        for (auto& c : p) c = unit_float(rng);
    return cloud;
}

PointCloud scan_cloud(std::size_t rings, std::size_t points_per_ring, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    PointCloud cloud;
    cloud.points.reserve(rings * points_per_ring);
    for (std::size_t r = 0; r < rings; ++r) {
        const double elevation = (-0.4 + 0.45 * static_cast<double>(r) / static_cast<double>(std::max<std::size_t>(1, rings - 1)));
        for (std::size_t k = 0; k < points_per_ring; ++k) {
            const double azimuth = 2 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(points_per_ring);
            const double range = 20.0 + 10.0 * std::sin(3 * azimuth + static_cast<double>(r)) + 0.5 * unit_float(rng);
            cloud.points.push_back({static_cast<float>(range * std::cos(elevation) * std::cos(azimuth)),
                                    static_cast<float>(range * std::cos(elevation) * std::sin(azimuth)),
                                    static_cast<float>(range * std::sin(elevation))});
        }
    }
    return cloud;
}

}  // namespace pcstream::kernels
