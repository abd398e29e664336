#include "sheetlight/shadow/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sheetlight/core/error.hpp"

namespace sheetlight::shadow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr double gamma_bound(int n) {
    constexpr double eps = std::numeric_limits<double>::epsilon() * 0.5;
    return (n * eps) / (1.0 - n * eps);
}

int max_abs_axis(const Vec3& v) {
    const double ax = std::abs(v.x), ay = std::abs(v.y), az = std::abs(v.z);
    if (ax > ay) return ax > az ? 0 : 2;
    return ay > az ? 1 : 2;
}

bool better(double t, std::uint32_t id, const std::optional<Hit>& best) {
    return !best || t < best->t || (t == best->t && id < best->triangle);
}

struct RayBoxSetup {
    Vec3 origin;
    Vec3 inv_dir;
};

bool hit_box(const Aabb& box, const RayBoxSetup& r, double t_max, double& t_enter) {
    double t0 = 0.0, t1 = t_max;
    for (int a = 0; a < 3; ++a) {
        double t_near = (box.lo[a] - r.origin[a]) * r.inv_dir[a];
        double t_far = (box.hi[a] - r.origin[a]) * r.inv_dir[a];
        if (t_near > t_far) std::swap(t_near, t_far);
        t_far *= 1.0 + 2.0 * gamma_bound(3);
        t0 = t_near > t0 ? t_near : t0;
        t1 = t_far < t1 ? t_far : t1;
        if (t0 > t1) return false;
    }
    t_enter = t0;
    return true;
}

Aabb triangle_bounds(const Triangle& t) {
    Aabb b;
    b.extend(t.a);
    b.extend(t.b);
    b.extend(t.c);
    return b;
}

Aabb padded(Aabb b) {
    for (int a = 0; a < 3; ++a) {
        const double pad = 1e-9 * (std::abs(b.lo[a]) + std::abs(b.hi[a])) + 1e-300;
        b.lo[a] -= pad;
        b.hi[a] += pad;
    }
    return b;
}

}  // namespace

std::optional<double> intersect_triangle(const Vec3& origin, const Vec3& dir, const Triangle& tri, double t_min,
                                         double t_max) {
    const int kz = max_abs_axis(dir);
    int kx = (kz + 1) % 3;
    int ky = (kx + 1) % 3;
    if (dir[kz] < 0.0) std::swap(kx, ky);

    const double sx = dir[kx] / dir[kz];
    const double sy = dir[ky] / dir[kz];
    const double sz = 1.0 / dir[kz];

    const Vec3 a = tri.a - origin;
    const Vec3 b = tri.b - origin;
    const Vec3 c = tri.c - origin;
    const double ax = a[kx] - sx * a[kz], ay = a[ky] - sy * a[kz];
    const double bx = b[kx] - sx * b[kz], by = b[ky] - sy * b[kz];
    const double cx = c[kx] - sx * c[kz], cy = c[ky] - sy * c[kz];

    const double u = cx * by - cy * bx;
    const double v = ax * cy - ay * cx;
    const double w = bx * ay - by * ax;
    if ((u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0)) return std::nullopt;

    const double det = u + v + w;
    if (det == 0.0) return std::nullopt;
    const double t_scaled = u * (sz * a[kz]) + v * (sz * b[kz]) + w * (sz * c[kz]);
    const double t = t_scaled / det;
    if (!(t > t_min && t < t_max)) return std::nullopt;
    return t;
}

std::optional<Hit> intersect_exhaustive(const Vec3& origin, const Vec3& dir, const std::vector<Triangle>& tris,
                                        double t_min) {
    std::optional<Hit> best;
    for (std::size_t i = 0; i < tris.size(); ++i) {
        const double t_max = best ? best->t : kInf;
        // Equal-t hits still compete on id, so allow t == best.
        const auto t = intersect_triangle(origin, dir, tris[i], t_min, std::nextafter(t_max, kInf));
        if (t && better(*t, std::uint32_t(i), best)) best = Hit{*t, origin + dir * *t, std::uint32_t(i)};
    }
    return best;
}

void Aabb::extend(const Vec3& p) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
}

void Aabb::extend(const Aabb& b) {
    extend(b.lo);
    extend(b.hi);
}

bool Aabb::contains(const Vec3& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
}

int Aabb::longest_axis() const {
    const Vec3 e = hi - lo;
    if (e.x >= e.y && e.x >= e.z) return 0;
    return e.y >= e.z ? 1 : 2;
}

Bvh::Bvh(std::vector<Triangle> triangles, std::vector<std::uint32_t> ids)
    : triangles_(std::move(triangles)), ids_(std::move(ids)) {
    if (ids_.empty()) {
        ids_.resize(triangles_.size());
        std::iota(ids_.begin(), ids_.end(), 0u);
    }
    if (ids_.size() != triangles_.size()) throw InvalidParameter("triangle id list has the wrong length");
    if (triangles_.empty()) return;
    std::vector<Vec3> centroids(triangles_.size());
    for (std::size_t i = 0; i < triangles_.size(); ++i) {
        centroids[i] = (triangles_[i].a + triangles_[i].b + triangles_[i].c) / 3.0;
    }
    nodes_.reserve(2 * triangles_.size() / kLeafSize + 1);
    build(0, std::uint32_t(triangles_.size()), centroids);
}

std::uint32_t Bvh::build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids) {
    const std::uint32_t node_index = std::uint32_t(nodes_.size());
    nodes_.push_back({});
    Aabb bounds, centroid_bounds;
    for (std::uint32_t i = begin; i < end; ++i) {
        bounds.extend(triangle_bounds(triangles_[i]));
        centroid_bounds.extend(centroids[i]);
    }
    nodes_[node_index].bounds = padded(bounds);

    if (end - begin <= std::uint32_t(kLeafSize)) {
        nodes_[node_index].first = begin;
        nodes_[node_index].count = end - begin;
        return node_index;
    }

    const int axis = centroid_bounds.longest_axis();
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::vector<std::uint32_t> order(end - begin);
    std::iota(order.begin(), order.end(), begin);
    std::nth_element(order.begin(), order.begin() + (mid - begin), order.end(),
                     [&](std::uint32_t l, std::uint32_t r) {
                         const double cl = centroids[l][axis], cr = centroids[r][axis];
                         return cl < cr || (cl == cr && l < r);
                     });
    std::vector<Triangle> tris(order.size());
    std::vector<std::uint32_t> ids(order.size());
    std::vector<Vec3> cents(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        tris[k] = triangles_[order[k]];
        ids[k] = ids_[order[k]];
        cents[k] = centroids[order[k]];
    }
    std::copy(tris.begin(), tris.end(), triangles_.begin() + begin);
    std::copy(ids.begin(), ids.end(), ids_.begin() + begin);
    std::copy(cents.begin(), cents.end(), centroids.begin() + begin);

    build(begin, mid, centroids);
    const std::uint32_t right = build(mid, end, centroids);
    nodes_[node_index].first = right;
    nodes_[node_index].count = 0;
    return node_index;
}

Bvh Bvh::from_mesh(const geom::SheetMesh& mesh, bool exclude_sky) {
    std::vector<Triangle> tris;
    std::vector<std::uint32_t> ids;
    tris.reserve(mesh.faces.size());
    ids.reserve(mesh.faces.size());
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        if (exclude_sky && mesh.is_sky_face(f)) continue;
        const geom::Face& face = mesh.faces[f];
        tris.push_back({mesh.vertices[face[0]], mesh.vertices[face[1]], mesh.vertices[face[2]]});
        ids.push_back(std::uint32_t(f));
    }
    if (tris.empty()) return Bvh({}, {});
    return Bvh(std::move(tris), std::move(ids));
}

std::optional<Hit> Bvh::intersect(const Vec3& origin, const Vec3& dir, double t_min) const {
    if (nodes_.empty()) return std::nullopt;
    const RayBoxSetup setup{origin, {1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z}};
    std::optional<Hit> best;

    struct Entry {
        std::uint32_t node;
        double t_enter;
    };
    Entry stack[128];
    int top = 0;
    double t_root = 0.0;
    if (!hit_box(nodes_[0].bounds, setup, kInf, t_root)) return std::nullopt;
    stack[top++] = {0, t_root};

    while (top > 0) {
        const Entry e = stack[--top];
        if (best && e.t_enter > best->t) continue;
        const Node& node = nodes_[e.node];
        if (node.count > 0) {
            for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
                const double t_max = best ? std::nextafter(best->t, kInf) : kInf;
                const auto t = intersect_triangle(origin, dir, triangles_[i], t_min, t_max);
                if (t && better(*t, ids_[i], best)) best = Hit{*t, origin + dir * *t, ids_[i]};
            }
            continue;
        }
        const std::uint32_t left = e.node + 1;
        const std::uint32_t right = node.first;
        const double limit = best ? best->t : kInf;
        double tl = 0.0, tr = 0.0;
        const bool hl = hit_box(nodes_[left].bounds, setup, limit, tl);
        const bool hr = hit_box(nodes_[right].bounds, setup, limit, tr);
        // Push the farther child first so the nearer one is visited next.
        if (hl && hr) {
            if (tl <= tr) {
                stack[top++] = {right, tr};
                stack[top++] = {left, tl};
            } else {
                stack[top++] = {left, tl};
                stack[top++] = {right, tr};
            }
        } else if (hl) {
            stack[top++] = {left, tl};
        } else if (hr) {
            stack[top++] = {right, tr};
        }
    }
    return best;
}

std::size_t Bvh::leaf_count() const {
    return std::size_t(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.count > 0; }));
}

std::vector<std::uint32_t> Bvh::leaf_triangle_ids() const {
    std::vector<std::uint32_t> out;
    for (const Node& n : nodes_) {
        for (std::uint32_t i = n.first; i < n.first + n.count; ++i) out.push_back(ids_[i]);
    }
    return out;
}

Aabb Bvh::subtree_bounds(std::uint32_t node, bool& ok) const {
    const Node& n = nodes_[node];
    Aabb b;
    if (n.count > 0) {
        for (std::uint32_t i = n.first; i < n.first + n.count; ++i) b.extend(triangle_bounds(triangles_[i]));
    } else {
        b.extend(subtree_bounds(node + 1, ok));
        b.extend(subtree_bounds(n.first, ok));
    }
    if (!n.bounds.contains(b.lo) || !n.bounds.contains(b.hi)) ok = false;
    return b;
}

bool Bvh::bounds_are_consistent() const {
    if (nodes_.empty()) return true;
    bool ok = true;
    subtree_bounds(0, ok);
    return ok;
}

}  // namespace sheetlight::shadow
