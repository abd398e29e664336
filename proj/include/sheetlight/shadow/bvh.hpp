#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sheetlight/core/vec3.hpp"
#include "sheetlight/geom/sheet.hpp"

namespace sheetlight::shadow {

struct Triangle {
    Vec3 a, b, c;
};

struct Hit {
    double t = 0.0;
    Vec3 point;
    std::uint32_t triangle = 0;  // caller-visible id (mesh face index)
};

/// Watertight ray/triangle test (Woop, Benthin & Wald 2013). Points on a
/// shared edge are reported by at least one of the adjacent triangles.
/// Returns t for hits with t_min < t < t_max.
std::optional<double> intersect_triangle(const Vec3& origin, const Vec3& dir, const Triangle& tri, double t_min,
                                         double t_max);

/// Nearest hit over every triangle, ties broken toward the lower id.
std::optional<Hit> intersect_exhaustive(const Vec3& origin, const Vec3& dir, const std::vector<Triangle>& tris,
                                        double t_min);

struct Aabb {
    Vec3 lo{1e300, 1e300, 1e300};
    Vec3 hi{-1e300, -1e300, -1e300};

    void extend(const Vec3& p);
    void extend(const Aabb& b);
    bool contains(const Vec3& p) const;
    int longest_axis() const;
};

/// Binary bounding-volume hierarchy, median split on the longest centroid
/// axis. Immutable after construction; safe to query from many threads.
class Bvh {
public:
    static constexpr int kLeafSize = 4;

    /// `ids[i]` is reported for triangle i; defaults to i.
    explicit Bvh(std::vector<Triangle> triangles, std::vector<std::uint32_t> ids = {});

    /// Faces of a sheet mesh; with `exclude_sky`, far-wall faces are left out
    /// so they never occlude. Hit ids are mesh face indices.
    static Bvh from_mesh(const geom::SheetMesh& mesh, bool exclude_sky);

    /// Nearest hit with t > t_min. Same t and triangle as intersect_exhaustive
    /// over the same triangles.
    std::optional<Hit> intersect(const Vec3& origin, const Vec3& dir, double t_min = 0.0) const;

    std::size_t triangle_count() const noexcept { return triangles_.size(); }
    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t leaf_count() const;
    /// Every leaf's triangle ids, concatenated in node order.
    std::vector<std::uint32_t> leaf_triangle_ids() const;
    /// True when every node's box encloses its whole subtree.
    bool bounds_are_consistent() const;

private:
    struct Node {
        Aabb bounds;
        std::uint32_t first = 0;  // leaf: first triangle; inner: right child
        std::uint32_t count = 0;  // 0 for inner nodes
    };

    std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids);
    Aabb subtree_bounds(std::uint32_t node, bool& ok) const;

    std::vector<Triangle> triangles_;
    std::vector<std::uint32_t> ids_;
    std::vector<Node> nodes_;
};

}  // namespace sheetlight::shadow
