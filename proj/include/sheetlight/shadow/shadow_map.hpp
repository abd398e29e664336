#pragma once

#include <cstdint>

#include "sheetlight/core/image.hpp"
#include "sheetlight/core/vec3.hpp"
#include "sheetlight/geom/sheet.hpp"
#include "sheetlight/shadow/bvh.hpp"

namespace sheetlight::shadow {

/// Continuous pixel coordinates; integer values are pixel centres.
struct PixelCoord {
    double x = 0.0;
    double y = 0.0;
};

/// Point at depth z on the camera ray through `pixel`.
Vec3 unproject_pixel(PixelCoord pixel, double depth, const geom::CameraModel& cam);

/// Inverse of unproject_pixel. Result may lie outside the image.
/// Throws BehindCamera when z <= 0.
PixelCoord reproject_point(const Vec3& point, const geom::CameraModel& cam);

/// Coarse cast-shadow map: per pixel, whether the ray toward the sun is
/// blocked by the sheet and, if so, the image colour of the blocker.
struct ShadowMap {
    int width = 0;
    int height = 0;
    Mask occluded;
    RgbImage occluder_rgb;             // zero where not occluded
    Grid<float> occluder_distance;     // ray parameter to first hit; 0 where not occluded
    Grid<std::int32_t> occluder_face;  // mesh face index; -1 where not occluded

    ShadowMap() = default;
    ShadowMap(int w, int h);

    std::size_t occluded_count() const;
};

struct ShadowCastOptions {
    /// Ray origin offset along the sun direction, as a fraction of local z.
    double bias_factor = 1e-3;
    /// Colour stored when the blocker reprojects outside the frame.
    float off_frame_gray = 0.5f;
    int workers = 1;
};

/// Casts one shadow ray per pixel. The receiver point is where the pixel's
/// camera ray meets the sheet. Receivers whose sheet face does not face the
/// sun are attached-shadow pixels and are left to the reflectance term; no
/// ray is cast for them.
ShadowMap render_shadow_map(const RgbImage& image, const geom::SheetMesh& mesh, const Bvh& accel,
                            const geom::CameraModel& cam, const Vec3& sun_dir, const ShadowCastOptions& opts = {});

/// Per-pixel bilinear interpolation of the sheet's vertex normals, renormalised.
Grid<Vec3> render_normal_map(const geom::SheetMesh& mesh, const geom::CameraModel& cam, int workers = 1);

/// max(0, n . sun) per pixel.
Grid<float> render_reflectance(const Grid<Vec3>& normal_map, const Vec3& sun_dir);

}  // namespace sheetlight::shadow
