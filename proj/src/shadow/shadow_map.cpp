#include "sheetlight/shadow/shadow_map.hpp"

#include <algorithm>
#include <cmath>

#include "sheetlight/core/error.hpp"
#include "sheetlight/core/parallel.hpp"

namespace sheetlight::shadow {

Vec3 unproject_pixel(PixelCoord pixel, double depth, const geom::CameraModel& cam) {
    if (!(depth > 0.0)) throw InvalidParameter("unproject depth must be positive");
    return {depth * cam.ndc_x(pixel.x) * cam.tan_x(), depth * cam.ndc_y(pixel.y) * cam.tan_y(), depth};
}

PixelCoord reproject_point(const Vec3& point, const geom::CameraModel& cam) {
    if (!(point.z > 0.0)) throw BehindCamera("cannot project a point with z <= 0");
    const double nx = point.x / (point.z * cam.tan_x());
    const double ny = point.y / (point.z * cam.tan_y());
    return {cam.pixel_x(nx), cam.pixel_y(ny)};
}

ShadowMap::ShadowMap(int w, int h)
    : width(w),
      height(h),
      occluded(w, h, 0),
      occluder_rgb(w, h, 0.0f),
      occluder_distance(w, h, 0.0f),
      occluder_face(w, h, -1) {}

std::size_t ShadowMap::occluded_count() const {
    return std::size_t(std::count(occluded.values().begin(), occluded.values().end(), std::uint8_t(1)));
}

ShadowMap render_shadow_map(const RgbImage& image, const geom::SheetMesh& mesh, const Bvh& accel,
                            const geom::CameraModel& cam, const Vec3& sun_dir, const ShadowCastOptions& opts) {
    cam.validate();
    if (image.width() != cam.width || image.height() != cam.height) {
        throw InvalidParameter("image and camera dimensions differ");
    }
    if (std::abs(length(sun_dir) - 1.0) > 1e-6) throw InvalidParameter("sun direction must be unit length");
    if (!(sun_dir.y > 0.0)) throw InvalidParameter("sun must be above the horizon");

    ShadowMap map(cam.width, cam.height);
    parallel_for(cam.height, opts.workers, [&](int row_begin, int row_end) {
        for (int y = row_begin; y < row_end; ++y) {
            const double ndc_y = cam.ndc_y(y);
            for (int x = 0; x < cam.width; ++x) {
                const geom::SurfaceSample s = geom::sheet_surface_at(mesh, cam.ndc_x(x), ndc_y);
                if (dot(s.face_normal, sun_dir) <= 0.0) continue;
                const double z = s.point.z;
                const Vec3 origin = s.point + sun_dir * (opts.bias_factor * z);
                const auto hit = accel.intersect(origin, sun_dir, 1e-9 * z);
                if (!hit) continue;

                map.occluded(x, y) = 1;
                map.occluder_distance(x, y) = float(hit->t);
                map.occluder_face(x, y) = std::int32_t(hit->triangle);
                float r = opts.off_frame_gray, g = opts.off_frame_gray, b = opts.off_frame_gray;
                if (hit->point.z > 0.0) {
                    const PixelCoord p = reproject_point(hit->point, cam);
                    const long px = std::lround(p.x), py = std::lround(p.y);
                    if (px >= 0 && py >= 0 && px < cam.width && py < cam.height) {
                        r = image.at(int(px), int(py), 0);
                        g = image.at(int(px), int(py), 1);
                        b = image.at(int(px), int(py), 2);
                    }
                }
                map.occluder_rgb.set(x, y, r, g, b);
            }
        }
    });
    return map;
}

Grid<Vec3> render_normal_map(const geom::SheetMesh& mesh, const geom::CameraModel& cam, int workers) {
    cam.validate();
    const int g = mesh.grid_size;
    Grid<Vec3> out(cam.width, cam.height);
    parallel_for(cam.height, workers, [&](int row_begin, int row_end) {
        for (int y = row_begin; y < row_end; ++y) {
            const double gy = std::clamp((1.0 - cam.ndc_y(y)) * 0.5 * (g - 1), 0.0, double(g - 1));
            const int r0 = std::min(int(gy), g - 2);
            const double fy = gy - r0;
            for (int x = 0; x < cam.width; ++x) {
                const double gx = std::clamp((cam.ndc_x(x) + 1.0) * 0.5 * (g - 1), 0.0, double(g - 1));
                const int c0 = std::min(int(gx), g - 2);
                const double fx = gx - c0;
                const Vec3 n = (1.0 - fy) * ((1.0 - fx) * mesh.normals[mesh.index(c0, r0)] +
                                             fx * mesh.normals[mesh.index(c0 + 1, r0)]) +
                               fy * ((1.0 - fx) * mesh.normals[mesh.index(c0, r0 + 1)] +
                                     fx * mesh.normals[mesh.index(c0 + 1, r0 + 1)]);
                const double len = length(n);
                out(x, y) = len > 0.0 ? n / len : Vec3{0.0, 0.0, -1.0};
            }
        }
    });
    return out;
}

Grid<float> render_reflectance(const Grid<Vec3>& normal_map, const Vec3& sun_dir) {
    Grid<float> out(normal_map.width(), normal_map.height());
    auto src = normal_map.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = float(std::clamp(dot(src[i], sun_dir), 0.0, 1.0));
    return out;
}

}  // namespace sheetlight::shadow
