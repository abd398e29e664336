#include "sheetlight/geom/sheet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sheetlight/core/error.hpp"

namespace sheetlight::geom {

InverseDepthMap::InverseDepthMap(Grid<float> values) : values_(std::move(values)) {
    if (values_.width() < 2 || values_.height() < 2) {
        throw InvalidParameter("inverse depth map must be at least 2x2, got " + std::to_string(values_.width()) + "x" +
                               std::to_string(values_.height()));
    }
    for (float v : values_.values()) {
        if (!std::isfinite(v) || v < 0.0f) throw InvalidParameter("inverse depth values must be finite and >= 0");
    }
}

void CameraModel::validate() const {
    if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw InvalidParameter("fov_deg must lie in (0, 180)");
    if (width <= 0 || height <= 0) throw InvalidParameter("camera image size must be positive");
}

double CameraModel::tan_x() const { return std::tan(fov_deg * std::numbers::pi / 360.0); }

double CameraModel::tan_y() const {
    const double t = tan_x();
    return aspect_correction ? t * double(height) / double(width) : t;
}

void GeometryParams::validate() const {
    if (!(d_min > 0.0)) throw InvalidParameter("d_min must be positive");
    if (grid_size < 2) throw InvalidParameter("grid_size must be >= 2");
    if (!(depth_scale > 0.0)) throw InvalidParameter("depth_scale must be positive");
    if (smooth_iterations < 0) throw InvalidParameter("smooth_iterations must be >= 0");
    if (!(smooth_lambda > 0.0 && smooth_lambda <= 1.0)) throw InvalidParameter("smooth_lambda must lie in (0, 1]");
    if (max_edge_depth_ratio != 0.0 && !(max_edge_depth_ratio > 1.0)) {
        throw InvalidParameter("max_edge_depth_ratio must be 0 (disabled) or > 1");
    }
}

ClampedDepth clamp_inverse_depth(const InverseDepthMap& d, double d_min) {
    if (!(d_min > 0.0)) throw InvalidParameter("d_min must be positive");
    Grid<float> out(d.width(), d.height());
    Mask raised(d.width(), d.height(), 0);
    const float floor_value = float(d_min);
    for (int y = 0; y < d.height(); ++y) {
        for (int x = 0; x < d.width(); ++x) {
            const float v = d(x, y);
            if (v < floor_value) {
                out(x, y) = floor_value;
                raised(x, y) = 1;
            } else {
                out(x, y) = v;
            }
        }
    }
    return {InverseDepthMap(std::move(out)), std::move(raised)};
}

Mask classify_sky(const ClampedDepth& clamped) { return clamped.raised; }

namespace {

double bilinear(const Grid<float>& g, double px, double py) {
    px = std::clamp(px, 0.0, double(g.width() - 1));
    py = std::clamp(py, 0.0, double(g.height() - 1));
    const int x0 = std::min(int(px), g.width() - 2);
    const int y0 = std::min(int(py), g.height() - 2);
    const double fx = px - x0;
    const double fy = py - y0;
    const double top = (1.0 - fx) * g(x0, y0) + fx * g(x0 + 1, y0);
    const double bottom = (1.0 - fx) * g(x0, y0 + 1) + fx * g(x0 + 1, y0 + 1);
    return (1.0 - fy) * top + fy * bottom;
}

double lattice_ndc(int i, int grid_size) { return -1.0 + 2.0 * double(i) / double(grid_size - 1); }

DepthGrid sample_impl(const InverseDepthMap& d, const Mask* raised, int grid_size, double depth_scale) {
    if (grid_size < 2) throw InvalidParameter("grid_size must be >= 2");
    if (!(depth_scale > 0.0)) throw InvalidParameter("depth_scale must be positive");
    DepthGrid out;
    out.grid_size = grid_size;
    out.z = Grid<double>(grid_size, grid_size);
    out.sky = Mask(grid_size, grid_size, 0);
    out.ndc_x.resize(std::size_t(grid_size));
    out.ndc_y.resize(std::size_t(grid_size));
    const int w = d.width();
    const int h = d.height();
    for (int i = 0; i < grid_size; ++i) {
        out.ndc_x[std::size_t(i)] = lattice_ndc(i, grid_size);
        out.ndc_y[std::size_t(i)] = -lattice_ndc(i, grid_size);
    }
    for (int row = 0; row < grid_size; ++row) {
        const double py = (1.0 - out.ndc_y[std::size_t(row)]) * 0.5 * h - 0.5;
        for (int col = 0; col < grid_size; ++col) {
            const double px = (out.ndc_x[std::size_t(col)] + 1.0) * 0.5 * w - 0.5;
            const double inv = bilinear(d.values(), px, py);
            if (!(inv > 0.0)) throw InvariantViolation("sampled inverse depth is zero; clamp before sampling");
            out.z(col, row) = depth_scale / inv;
            if (raised) {
                const int nx = std::clamp(int(std::lround(px)), 0, w - 1);
                const int ny = std::clamp(int(std::lround(py)), 0, h - 1);
                out.sky(col, row) = (*raised)(nx, ny);
            }
        }
    }
    return out;
}

}  // namespace

DepthGrid sample_depth_grid(const ClampedDepth& d, int grid_size, double depth_scale) {
    return sample_impl(d.depth, &d.raised, grid_size, depth_scale);
}

DepthGrid sample_depth_grid(const InverseDepthMap& d, int grid_size, double depth_scale) {
    return sample_impl(d, nullptr, grid_size, depth_scale);
}

bool SheetMesh::is_sky_face(std::size_t f) const {
    const Face& t = faces[f];
    return sky[t[0]] && sky[t[1]] && sky[t[2]];
}

namespace {

void place_vertex(SheetMesh& m, int col, int row, double z) {
    m.vertices[m.index(col, row)] = {z * m.ndc_x[std::size_t(col)] * m.tan_x, z * m.ndc_y[std::size_t(row)] * m.tan_y, z};
}

bool keep_face(const SheetMesh& m, const Face& f, double max_ratio) {
    if (max_ratio <= 0.0) return true;
    const double a = m.vertices[f[0]].z, b = m.vertices[f[1]].z, c = m.vertices[f[2]].z;
    return std::max({a, b, c}) <= max_ratio * std::min({a, b, c});
}

}  // namespace

SheetMesh build_sheet_mesh(const DepthGrid& grid, const CameraModel& cam, double max_edge_depth_ratio) {
    cam.validate();
    const int g = grid.grid_size;
    if (g < 2 || !grid.z.same_shape(g, g)) throw InvalidParameter("depth grid is malformed");
    SheetMesh m;
    m.grid_size = g;
    m.tan_x = cam.tan_x();
    m.tan_y = cam.tan_y();
    m.ndc_x = grid.ndc_x;
    m.ndc_y = grid.ndc_y;
    const std::size_t n = std::size_t(g) * std::size_t(g);
    m.vertices.resize(n);
    m.normals.assign(n, Vec3{0.0, 0.0, -1.0});
    m.sky.assign(n, 0);
    for (int row = 0; row < g; ++row) {
        for (int col = 0; col < g; ++col) {
            const double z = grid.z(col, row);
            if (!(z > 0.0) || !std::isfinite(z)) throw InvalidParameter("depth grid values must be positive and finite");
            place_vertex(m, col, row, z);
            if (!grid.sky.empty()) m.sky[m.index(col, row)] = grid.sky(col, row);
        }
    }
    m.faces.reserve(std::size_t(2) * std::size_t(g - 1) * std::size_t(g - 1));
    for (int row = 0; row + 1 < g; ++row) {
        for (int col = 0; col + 1 < g; ++col) {
            const std::uint32_t a = m.index(col, row), b = m.index(col + 1, row);
            const std::uint32_t c = m.index(col, row + 1), d = m.index(col + 1, row + 1);
            for (const Face& f : {Face{a, c, b}, Face{b, c, d}}) {
                if (keep_face(m, f, max_edge_depth_ratio)) m.faces.push_back(f);
            }
        }
    }
    return m;
}

SheetMesh laplacian_smooth(const SheetMesh& mesh, int iterations, double lambda) {
    if (iterations < 0) throw InvalidParameter("iterations must be >= 0");
    if (!(lambda > 0.0 && lambda <= 1.0)) throw InvalidParameter("lambda must lie in (0, 1]");
    SheetMesh out = mesh;
    const int g = mesh.grid_size;
    std::vector<double> z(mesh.vertices.size()), next;
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = mesh.vertices[i].z;
    for (int it = 0; it < iterations; ++it) {
        next = z;
        for (int row = 1; row + 1 < g; ++row) {
            for (int col = 1; col + 1 < g; ++col) {
                const std::size_t i = out.index(col, row);
                const double mean =
                    0.25 * (z[i - 1] + z[i + 1] + z[i - std::size_t(g)] + z[i + std::size_t(g)]);
                next[i] = z[i] + lambda * (mean - z[i]);
            }
        }
        z.swap(next);
    }
    for (int row = 1; row + 1 < g; ++row) {
        for (int col = 1; col + 1 < g; ++col) place_vertex(out, col, row, z[out.index(col, row)]);
    }
    return out;
}

namespace {

Vec3 oriented_toward_camera(Vec3 n, const Vec3& on_surface) {
    return dot(n, on_surface) > 0.0 ? -n : n;
}

}  // namespace

SheetMesh compute_normals(const SheetMesh& mesh) {
    SheetMesh out = mesh;
    std::vector<Vec3> acc(mesh.vertices.size());
    for (const Face& f : mesh.faces) {
        const Vec3& p0 = mesh.vertices[f[0]];
        const Vec3& p1 = mesh.vertices[f[1]];
        const Vec3& p2 = mesh.vertices[f[2]];
        // Unnormalised cross product: its length is twice the face area.
        const Vec3 n = oriented_toward_camera(cross(p1 - p0, p2 - p0), (p0 + p1 + p2) / 3.0);
        for (std::uint32_t v : f) acc[v] += n;
    }
    for (std::size_t i = 0; i < acc.size(); ++i) {
        const double len = length(acc[i]);
        out.normals[i] = len > 0.0 ? acc[i] / len : Vec3{0.0, 0.0, -1.0};
    }
    return out;
}

SceneSheet build_scene_sheet(const InverseDepthMap& d, const CameraModel& cam, const GeometryParams& params) {
    params.validate();
    ClampedDepth clamped = clamp_inverse_depth(d, params.d_min);
    const DepthGrid grid = sample_depth_grid(clamped, params.grid_size, params.depth_scale);
    SheetMesh mesh = build_sheet_mesh(grid, cam, params.max_edge_depth_ratio);
    mesh = laplacian_smooth(mesh, params.smooth_iterations, params.smooth_lambda);
    mesh = compute_normals(mesh);
    return {std::move(clamped), std::move(mesh)};
}

SurfaceSample sheet_surface_at(const SheetMesh& mesh, double ndc_x, double ndc_y) {
    const int g = mesh.grid_size;
    const double gx = std::clamp((ndc_x + 1.0) * 0.5 * (g - 1), 0.0, double(g - 1));
    const double gy = std::clamp((1.0 - ndc_y) * 0.5 * (g - 1), 0.0, double(g - 1));
    const int col = std::min(int(gx), g - 2);
    const int row = std::min(int(gy), g - 2);
    const double fx = gx - col;
    const double fy = gy - row;

    const Vec3& a = mesh.vertex(col, row);
    const Vec3& b = mesh.vertex(col + 1, row);
    const Vec3& c = mesh.vertex(col, row + 1);
    const Vec3& d = mesh.vertex(col + 1, row + 1);
    const bool upper = fx + fy <= 1.0;
    const Vec3& p0 = upper ? a : b;
    const Vec3& p1 = c;
    const Vec3& p2 = upper ? b : d;

    const Vec3 ray{ndc_x * mesh.tan_x, ndc_y * mesh.tan_y, 1.0};
    const Vec3 n = cross(p1 - p0, p2 - p0);
    const double denom = dot(n, ray);
    double t;
    if (std::abs(denom) > 1e-12 * length(n) * length(ray)) {
        t = dot(n, p0) / denom;
    } else {
        // Ray grazes the triangle plane; fall back to barycentric depth.
        t = upper ? (1.0 - fx - fy) * a.z + fx * b.z + fy * c.z
                  : (fx + fy - 1.0) * d.z + (1.0 - fy) * b.z + (1.0 - fx) * c.z;
    }
    const Vec3 point = ray * t;
    const double len = length(n);
    const Vec3 unit = len > 0.0 ? n / len : Vec3{0.0, 0.0, -1.0};
    return {point, oriented_toward_camera(unit, point)};
}

}  // namespace sheetlight::geom
