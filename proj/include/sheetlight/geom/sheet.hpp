#pragma once

// Depth-to-mesh reconstruction: an inverse-depth map is clamped, sampled on a
// regular G x G lattice and each lattice point is pushed along its camera ray
// to the sampled depth, giving a grid-topology "sheet" draped over the scene.
//
// Camera frame: x right, y up, z forward, camera at the origin.
// Pixel (u, v) has NDC ((2u + 1)/W - 1, 1 - (2v + 1)/H).

#include <array>
#include <cstdint>
#include <vector>

#include "sheetlight/core/image.hpp"
#include "sheetlight/core/vec3.hpp"

namespace sheetlight::geom {

/// Relative inverse depth from an external monocular depth model.
/// Values are finite and >= 0; dimensions are at least 2x2.
class InverseDepthMap {
public:
    explicit InverseDepthMap(Grid<float> values);

    int width() const noexcept { return values_.width(); }
    int height() const noexcept { return values_.height(); }
    float operator()(int x, int y) const { return values_(x, y); }
    const Grid<float>& values() const noexcept { return values_; }

private:
    Grid<float> values_;
};

struct CameraModel {
    double fov_deg = 90.0;
    int width = 0;
    int height = 0;
    /// Scale the vertical tangent by height/width. Off by default, which
    /// applies the same tangent to both axes.
    bool aspect_correction = false;

    /// Throws InvalidParameter unless 0 < fov < 180 and the size is positive.
    void validate() const;

    double tan_x() const;
    double tan_y() const;

    double ndc_x(double pixel_x) const { return (2.0 * pixel_x + 1.0) / width - 1.0; }
    double ndc_y(double pixel_y) const { return 1.0 - (2.0 * pixel_y + 1.0) / height; }
    double pixel_x(double ndc) const { return (ndc + 1.0) * 0.5 * width - 0.5; }
    double pixel_y(double ndc) const { return (1.0 - ndc) * 0.5 * height - 0.5; }
};

struct GeometryParams {
    double d_min = 100.0;
    int grid_size = 129;
    double depth_scale = 1000.0;
    int smooth_iterations = 10;
    double smooth_lambda = 0.5;
    /// Drop faces whose max/min vertex depth ratio exceeds this value.
    /// Zero disables dropping and keeps the sheet fully connected.
    double max_edge_depth_ratio = 0.0;

    void validate() const;
};

struct ClampedDepth {
    InverseDepthMap depth;
    Mask raised;  // pixels lifted to d_min: the far wall / sky
};

/// Every value becomes max(value, d_min); raised pixels are flagged.
ClampedDepth clamp_inverse_depth(const InverseDepthMap& d, double d_min);

/// Per-pixel sky mask: the pixels raised by clamping.
Mask classify_sky(const ClampedDepth& clamped);

struct DepthGrid {
    int grid_size = 0;
    Grid<double> z;              // depth_scale / sampled inverse depth
    std::vector<double> ndc_x;   // per column, -1 .. 1
    std::vector<double> ndc_y;   // per row, 1 (top) .. -1 (bottom)
    Mask sky;                    // nearest source pixel was raised by clamping
};

/// Bilinearly samples `d` on a G x G lattice whose NDC coordinates span
/// [-1, 1] and converts to depth with z = depth_scale / d.
DepthGrid sample_depth_grid(const ClampedDepth& d, int grid_size, double depth_scale);
DepthGrid sample_depth_grid(const InverseDepthMap& d, int grid_size, double depth_scale);

using Face = std::array<std::uint32_t, 3>;

struct SheetMesh {
    int grid_size = 0;
    double tan_x = 1.0;
    double tan_y = 1.0;
    std::vector<double> ndc_x;
    std::vector<double> ndc_y;
    std::vector<Vec3> vertices;   // index = row * G + column
    std::vector<Face> faces;
    std::vector<Vec3> normals;    // per vertex, unit, facing the camera
    std::vector<std::uint8_t> sky;

    std::uint32_t index(int column, int row) const { return std::uint32_t(row * grid_size + column); }
    const Vec3& vertex(int column, int row) const { return vertices[index(column, row)]; }

    /// True when all three vertices of face `f` lie on the far wall.
    bool is_sky_face(std::size_t f) const;
};

/// Places each lattice vertex at V = (z ndc_x tan_x, z ndc_y tan_y, z). Two
/// triangles per lattice cell. Normals are initialised to (0, 0, -1).
SheetMesh build_sheet_mesh(const DepthGrid& grid, const CameraModel& cam, double max_edge_depth_ratio = 0.0);

/// Umbrella-operator smoothing of the depth field. Each interior vertex
/// moves along its camera ray so that z approaches the mean z of its four
/// lattice neighbours by `lambda`; boundary vertices stay fixed.
SheetMesh laplacian_smooth(const SheetMesh& mesh, int iterations, double lambda);

/// Area-weighted vertex normals, oriented toward the camera.
SheetMesh compute_normals(const SheetMesh& mesh);

/// Runs clamp -> sample -> build -> smooth -> normals.
struct SceneSheet {
    ClampedDepth clamped;
    SheetMesh mesh;
};
SceneSheet build_scene_sheet(const InverseDepthMap& d, const CameraModel& cam, const GeometryParams& params);

/// Where the camera ray through an NDC position meets the sheet.
struct SurfaceSample {
    Vec3 point;
    Vec3 face_normal;  // unit, facing the camera
};

/// Exact ray/sheet intersection for the ray through (ndc_x, ndc_y). The
/// sheet is a height field over the lattice, so the hit triangle is the one
/// whose lattice footprint contains the NDC position.
SurfaceSample sheet_surface_at(const SheetMesh& mesh, double ndc_x, double ndc_y);

}  // namespace sheetlight::geom
