#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <utility>

#include "sheetlight/core/error.hpp"
#include "sheetlight/geom/sheet.hpp"

using namespace sheetlight;
using namespace sheetlight::geom;

namespace {

InverseDepthMap constant_map(int w, int h, float v) { return InverseDepthMap(Grid<float>(w, h, v)); }

InverseDepthMap random_map(int w, int h, std::uint64_t seed, float lo, float hi) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(lo, hi);
    Grid<float> g(w, h);
    for (float& v : g.values()) v = u(rng);
    return InverseDepthMap(std::move(g));
}

DepthGrid flat_grid(int g, double z) {
    DepthGrid grid;
    grid.grid_size = g;
    grid.z = Grid<double>(g, g, z);
    for (int i = 0; i < g; ++i) {
        const double t = -1.0 + 2.0 * i / (g - 1);
        grid.ndc_x.push_back(t);
        grid.ndc_y.push_back(-t);
    }
    return grid;
}

// Direct bilinear lookup at a continuous pixel position, clamped to the
// pixel-centre hull.
double bilinear_oracle(const Grid<float>& g, double px, double py) {
    px = std::min(std::max(px, 0.0), double(g.width() - 1));
    py = std::min(std::max(py, 0.0), double(g.height() - 1));
    const double x0 = std::floor(px), y0 = std::floor(py);
    const int ix = int(x0), iy = int(y0);
    const int ix1 = std::min(ix + 1, g.width() - 1), iy1 = std::min(iy + 1, g.height() - 1);
    const double fx = px - x0, fy = py - y0;
    return g(ix, iy) * (1 - fx) * (1 - fy) + g(ix1, iy) * fx * (1 - fy) + g(ix, iy1) * (1 - fx) * fy +
           g(ix1, iy1) * fx * fy;
}

}  // namespace

TEST(Clamp, RaisesValuesBelowFloorAndFlagsThem) {
    Grid<float> g(2, 2, 900.0f);
    g(0, 0) = 50.0f;
    const ClampedDepth c = clamp_inverse_depth(InverseDepthMap(g), 100.0);
    EXPECT_EQ(c.depth(0, 0), 100.0f);
    EXPECT_EQ(c.depth(1, 0), 900.0f);
    EXPECT_EQ(c.raised(0, 0), 1);
    EXPECT_EQ(c.raised(1, 0), 0);
}

TEST(Clamp, AboveFloorIsIdentity) {
    const InverseDepthMap d = random_map(9, 7, 3, 200.0f, 900.0f);
    const ClampedDepth c = clamp_inverse_depth(d, 100.0);
    EXPECT_TRUE(c.depth.values() == d.values());
    for (auto f : c.raised.values()) EXPECT_EQ(f, 0);
}

TEST(Clamp, AcceptsBothFloorSettings) {
    const InverseDepthMap d = random_map(8, 8, 4, 0.0f, 1000.0f);
    for (double dmin : {100.0, 800.0}) {
        const ClampedDepth c = clamp_inverse_depth(d, dmin);
        for (float v : c.depth.values().values()) EXPECT_GE(v, float(dmin));
    }
}

TEST(Clamp, RejectsNonPositiveFloor) {
    const InverseDepthMap d = constant_map(2, 2, 1.0f);
    EXPECT_THROW(clamp_inverse_depth(d, 0.0), InvalidParameter);
    EXPECT_THROW(clamp_inverse_depth(d, -5.0), InvalidParameter);
}

TEST(InverseDepth, RejectsBadInput) {
    EXPECT_THROW(InverseDepthMap(Grid<float>(1, 4, 1.0f)), InvalidParameter);
    Grid<float> g(3, 3, 1.0f);
    g(1, 1) = -1.0f;
    EXPECT_THROW(InverseDepthMap{g}, InvalidParameter);
    g(1, 1) = std::nanf("");
    EXPECT_THROW(InverseDepthMap{g}, InvalidParameter);
}

TEST(ClassifySky, EmptyFullAndTopHalf) {
    EXPECT_TRUE(classify_sky(clamp_inverse_depth(constant_map(6, 4, 500.0f), 100.0)) == Mask(6, 4, 0));
    EXPECT_TRUE(classify_sky(clamp_inverse_depth(constant_map(6, 4, 5.0f), 100.0)) == Mask(6, 4, 1));

    Grid<float> g(6, 8, 600.0f);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 6; ++x) g(x, y) = 20.0f;
    const Mask sky = classify_sky(clamp_inverse_depth(InverseDepthMap(g), 100.0));
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 6; ++x) EXPECT_EQ(sky(x, y), y < 4 ? 1 : 0);
}

TEST(SampleGrid, ConstantMapGivesConstantDepth) {
    const DepthGrid g = sample_depth_grid(constant_map(10, 6, 500.0f), 17, 1000.0);
    for (double z : g.z.values()) EXPECT_DOUBLE_EQ(z, 2.0);
}

TEST(SampleGrid, DefaultLatticeSize) {
    const DepthGrid g = sample_depth_grid(constant_map(64, 32, 400.0f), 129, 1000.0);
    EXPECT_EQ(g.z.size(), 16641u);
    EXPECT_EQ(g.ndc_x.front(), -1.0);
    EXPECT_EQ(g.ndc_x.back(), 1.0);
    EXPECT_EQ(g.ndc_y.front(), 1.0);
    EXPECT_EQ(g.ndc_y.back(), -1.0);
    for (std::size_t i = 1; i < g.ndc_x.size(); ++i) {
        EXPECT_GT(g.ndc_x[i], g.ndc_x[i - 1]);
        EXPECT_LT(g.ndc_y[i], g.ndc_y[i - 1]);
    }
}

TEST(SampleGrid, TwoByTwoMatchesCornerInterpolation) {
    const InverseDepthMap d = random_map(4, 4, 11, 100.0f, 900.0f);
    const DepthGrid g = sample_depth_grid(d, 2, 1000.0);
    // Lattice corners sit on the outer pixel edges, i.e. pixel coords -0.5 and 3.5.
    const std::pair<int, int> corners[] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    for (auto [c, r] : corners) {
        const double oracle = bilinear_oracle(d.values(), c ? 3.5 : -0.5, r ? 3.5 : -0.5);
        EXPECT_NEAR(g.z(c, r), 1000.0 / oracle, 1e-9);
    }
}

TEST(SampleGrid, MatchesPerPixelBilinearOracle) {
    const InverseDepthMap d = random_map(13, 9, 12, 100.0f, 900.0f);
    const int G = 7;
    const DepthGrid g = sample_depth_grid(d, G, 500.0);
    for (int r = 0; r < G; ++r) {
        for (int c = 0; c < G; ++c) {
            const double px = double(c) / (G - 1) * 13 - 0.5;
            const double py = double(r) / (G - 1) * 9 - 0.5;
            EXPECT_NEAR(g.z(c, r), 500.0 / bilinear_oracle(d.values(), px, py), 1e-9 * g.z(c, r));
        }
    }
}

TEST(SampleGrid, RejectsBadParameters) {
    const InverseDepthMap d = constant_map(4, 4, 100.0f);
    EXPECT_THROW(sample_depth_grid(d, 1, 1000.0), InvalidParameter);
    EXPECT_THROW(sample_depth_grid(d, 5, 0.0), InvalidParameter);
    EXPECT_THROW(sample_depth_grid(constant_map(4, 4, 0.0f), 5, 1000.0), InvariantViolation);
}

TEST(BuildMesh, VertexFormula) {
    const CameraModel cam{90.0, 100, 100};
    const SheetMesh m = build_sheet_mesh(flat_grid(9, 2.0), cam);
    // Column 6 has ndc_x 0.5, row 5 has ndc_y -0.25.
    const Vec3 v = m.vertex(6, 5);
    EXPECT_NEAR(v.x, 1.0, 1e-12);
    EXPECT_NEAR(v.y, -0.5, 1e-12);
    EXPECT_NEAR(v.z, 2.0, 1e-12);
}

TEST(BuildMesh, OpticalAxisVertex) {
    const SheetMesh m = build_sheet_mesh(flat_grid(5, 1.0), CameraModel{70.0, 30, 20});
    const Vec3 v = m.vertex(2, 2);
    EXPECT_EQ(v.x, 0.0);
    EXPECT_EQ(v.y, 0.0);
    EXPECT_EQ(v.z, 1.0);
}

TEST(BuildMesh, TriangleCountAndWatertightSheet) {
    const SheetMesh m = build_sheet_mesh(flat_grid(129, 3.0), CameraModel{90.0, 64, 64});
    EXPECT_EQ(m.faces.size(), 32768u);
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> edges;
    for (const Face& f : m.faces) {
        for (int e = 0; e < 3; ++e) {
            auto a = f[std::size_t(e)], b = f[std::size_t((e + 1) % 3)];
            edges[{std::min(a, b), std::max(a, b)}]++;
        }
    }
    const int g = m.grid_size;
    for (const auto& [edge, count] : edges) {
        const auto [a, b] = edge;
        const int ca = int(a) % g, ra = int(a) / g, cb = int(b) % g, rb = int(b) / g;
        const bool boundary = (ra == rb && (ra == 0 || ra == g - 1)) || (ca == cb && (ca == 0 || ca == g - 1));
        EXPECT_EQ(count, boundary ? 1 : 2);
    }
}

TEST(BuildMesh, RayRatioHoldsOnEveryVertex) {
    const CameraModel cam{75.0, 200, 120};
    const InverseDepthMap d = random_map(200, 120, 21, 50.0f, 1000.0f);
    const DepthGrid grid = sample_depth_grid(clamp_inverse_depth(d, 100.0), 129, 1000.0);
    const SheetMesh m = build_sheet_mesh(grid, cam);
    for (int r = 0; r < 129; ++r) {
        for (int c = 0; c < 129; ++c) {
            const Vec3 v = m.vertex(c, r);
            EXPECT_NEAR(v.x / v.z, grid.ndc_x[std::size_t(c)] * cam.tan_x(), 1e-12);
            EXPECT_NEAR(v.y / v.z, grid.ndc_y[std::size_t(r)] * cam.tan_y(), 1e-12);
            EXPECT_EQ(v.z, grid.z(c, r));
            EXPECT_LE(v.z, 1000.0 / 100.0 + 1e-9);
        }
    }
}

TEST(BuildMesh, AspectCorrectionScalesVerticalTangent) {
    const CameraModel plain{90.0, 200, 100, false};
    const CameraModel corrected{90.0, 200, 100, true};
    EXPECT_DOUBLE_EQ(plain.tan_y(), plain.tan_x());
    EXPECT_DOUBLE_EQ(corrected.tan_y(), corrected.tan_x() * 0.5);
    const SheetMesh m = build_sheet_mesh(flat_grid(3, 4.0), corrected);
    EXPECT_NEAR(m.vertex(0, 0).y, 4.0 * 0.5, 1e-12);
    EXPECT_NEAR(m.vertex(0, 0).x, -4.0, 1e-12);
}

TEST(BuildMesh, EdgeRatioDropsSteepFaces) {
    DepthGrid g = flat_grid(4, 2.0);
    g.z(3, 3) = 20.0;
    const CameraModel cam{90.0, 10, 10};
    EXPECT_EQ(build_sheet_mesh(g, cam).faces.size(), 18u);
    EXPECT_EQ(build_sheet_mesh(g, cam, 3.0).faces.size(), 17u);
}

TEST(Smooth, ZeroIterationsIsIdentity) {
    const SheetMesh m = build_sheet_mesh(sample_depth_grid(random_map(20, 20, 5, 100.0f, 900.0f), 9, 1000.0),
                                         CameraModel{90.0, 20, 20});
    const SheetMesh s = laplacian_smooth(m, 0, 0.5);
    EXPECT_TRUE(s.vertices == m.vertices);
}

TEST(Smooth, PlanarSheetIsFixedPoint) {
    const SheetMesh m = build_sheet_mesh(flat_grid(11, 3.0), CameraModel{90.0, 20, 20});
    for (double lambda : {0.1, 0.5, 1.0}) {
        const SheetMesh s = laplacian_smooth(m, 25, lambda);
        for (std::size_t i = 0; i < m.vertices.size(); ++i) {
            EXPECT_NEAR(s.vertices[i].x, m.vertices[i].x, 1e-12);
            EXPECT_NEAR(s.vertices[i].y, m.vertices[i].y, 1e-12);
            EXPECT_NEAR(s.vertices[i].z, m.vertices[i].z, 1e-12);
        }
    }
}

TEST(Smooth, SpikeMovesHalfwayToUmbrellaMean) {
    DepthGrid g = flat_grid(5, 2.0);
    g.z(2, 2) = 4.0;
    g.z(3, 2) = 3.0;
    const SheetMesh m = build_sheet_mesh(g, CameraModel{90.0, 10, 10});
    const SheetMesh s = laplacian_smooth(m, 1, 0.5);
    const double mean = (2.0 + 3.0 + 2.0 + 2.0) / 4.0;
    EXPECT_NEAR(s.vertex(2, 2).z, 4.0 + 0.5 * (mean - 4.0), 1e-12);
    // Vertex stays on its camera ray.
    EXPECT_NEAR(s.vertex(2, 2).x / s.vertex(2, 2).z, m.vertex(2, 2).x / m.vertex(2, 2).z, 1e-12);
    // Neighbour (3,2) sees the old spike value, not the updated one.
    EXPECT_NEAR(s.vertex(3, 2).z, 3.0 + 0.5 * ((4.0 + 2.0 + 2.0 + 2.0) / 4.0 - 3.0), 1e-12);
    for (int i = 0; i < 5; ++i) {
        EXPECT_EQ(s.vertex(i, 0), m.vertex(i, 0));
        EXPECT_EQ(s.vertex(0, i), m.vertex(0, i));
    }
}

TEST(Smooth, UmbrellaDeviationNeverGrows) {
    const SheetMesh m = build_sheet_mesh(sample_depth_grid(random_map(40, 40, 8, 100.0f, 900.0f), 17, 1000.0),
                                         CameraModel{90.0, 40, 40});
    auto deviation = [](const SheetMesh& s) {
        double worst = 0.0;
        const int g = s.grid_size;
        for (int r = 1; r + 1 < g; ++r)
            for (int c = 1; c + 1 < g; ++c) {
                const double mean =
                    0.25 * (s.vertex(c - 1, r).z + s.vertex(c + 1, r).z + s.vertex(c, r - 1).z + s.vertex(c, r + 1).z);
                worst = std::max(worst, std::abs(s.vertex(c, r).z - mean));
            }
        return worst;
    };
    SheetMesh s = m;
    double prev = deviation(s);
    for (int it = 0; it < 10; ++it) {
        s = laplacian_smooth(s, 1, 0.5);
        const double d = deviation(s);
        EXPECT_LE(d, prev + 1e-12);
        prev = d;
    }
}

TEST(Smooth, RejectsBadParameters) {
    const SheetMesh m = build_sheet_mesh(flat_grid(3, 1.0), CameraModel{90.0, 4, 4});
    EXPECT_THROW(laplacian_smooth(m, -1, 0.5), InvalidParameter);
    EXPECT_THROW(laplacian_smooth(m, 1, 0.0), InvalidParameter);
    EXPECT_THROW(laplacian_smooth(m, 1, 1.5), InvalidParameter);
}

TEST(Normals, FrontoParallelPlane) {
    const SheetMesh m = compute_normals(build_sheet_mesh(flat_grid(9, 5.0), CameraModel{90.0, 10, 10}));
    for (const Vec3& n : m.normals) {
        EXPECT_NEAR(n.x, 0.0, 1e-12);
        EXPECT_NEAR(n.y, 0.0, 1e-12);
        EXPECT_NEAR(n.z, -1.0, 1e-12);
    }
}

TEST(Normals, TiltedRampMatchesPlaneNormal) {
    // Plane y + z = 5, whose camera-facing normal is (0, -1, -1)/sqrt 2.
    const CameraModel cam{60.0, 50, 50};
    DepthGrid g = flat_grid(9, 1.0);
    for (int r = 0; r < 9; ++r)
        for (int c = 0; c < 9; ++c) g.z(c, r) = 5.0 / (1.0 + g.ndc_y[std::size_t(r)] * cam.tan_y());
    const SheetMesh m = compute_normals(build_sheet_mesh(g, cam));
    const double h = std::sqrt(0.5);
    for (const Vec3& n : m.normals) {
        EXPECT_NEAR(n.x, 0.0, 1e-9);
        EXPECT_NEAR(n.y, -h, 1e-9);
        EXPECT_NEAR(n.z, -h, 1e-9);
    }
}

TEST(Normals, ScaleInvariant) {
    const SheetMesh m = build_sheet_mesh(sample_depth_grid(random_map(30, 30, 9, 100.0f, 900.0f), 9, 1000.0),
                                         CameraModel{90.0, 30, 30});
    SheetMesh scaled = m;
    for (Vec3& v : scaled.vertices) v = v * 3.5;
    const SheetMesh a = compute_normals(m), b = compute_normals(scaled);
    for (std::size_t i = 0; i < a.normals.size(); ++i) {
        EXPECT_NEAR(length(a.normals[i]), 1.0, 1e-12);
        EXPECT_NEAR(a.normals[i].x, b.normals[i].x, 1e-12);
        EXPECT_NEAR(a.normals[i].y, b.normals[i].y, 1e-12);
        EXPECT_NEAR(a.normals[i].z, b.normals[i].z, 1e-12);
        EXPECT_LT(dot(a.normals[i], a.vertices[i]), 0.0);
    }
}

TEST(Normals, DegenerateNeighbourhoodDefaultsToCamera) {
    SheetMesh m = build_sheet_mesh(flat_grid(2, 1.0), CameraModel{90.0, 4, 4});
    for (Vec3& v : m.vertices) v = {0.0, 0.0, 1.0};
    m = compute_normals(m);
    for (const Vec3& n : m.normals) EXPECT_EQ(n, (Vec3{0.0, 0.0, -1.0}));
}

TEST(SceneSheet, SkyFlagsFollowClampedPixels) {
    Grid<float> g(32, 32, 600.0f);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 32; ++x) g(x, y) = 10.0f;
    GeometryParams p;
    p.grid_size = 9;
    p.smooth_iterations = 0;
    const SceneSheet s = build_scene_sheet(InverseDepthMap(g), CameraModel{90.0, 32, 32}, p);
    for (int r = 0; r < 9; ++r)
        for (int c = 0; c < 9; ++c) EXPECT_EQ(s.mesh.sky[s.mesh.index(c, r)], r < 4 ? 1 : 0);
    std::size_t sky_faces = 0;
    for (std::size_t f = 0; f < s.mesh.faces.size(); ++f) sky_faces += s.mesh.is_sky_face(f);
    EXPECT_EQ(sky_faces, 2u * 8u * 3u);
}

TEST(SceneSheet, SurfaceSampleLiesOnPlane) {
    const CameraModel cam{60.0, 50, 50};
    DepthGrid g = flat_grid(9, 1.0);
    for (int r = 0; r < 9; ++r)
        for (int c = 0; c < 9; ++c) g.z(c, r) = 5.0 / (1.0 + g.ndc_y[std::size_t(r)] * cam.tan_y());
    const SheetMesh m = build_sheet_mesh(g, cam);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double nx = u(rng), ny = u(rng);
        const SurfaceSample s = sheet_surface_at(m, nx, ny);
        EXPECT_NEAR(s.point.y + s.point.z, 5.0, 1e-9);
        EXPECT_NEAR(s.point.x / s.point.z, nx * cam.tan_x(), 1e-9);
        EXPECT_NEAR(s.face_normal.y, -std::sqrt(0.5), 1e-9);
    }
}

TEST(Params, Validation) {
    GeometryParams p;
    EXPECT_NO_THROW(p.validate());
    p.d_min = 0.0;
    EXPECT_THROW(p.validate(), InvalidParameter);
    p = {};
    p.grid_size = 1;
    EXPECT_THROW(p.validate(), InvalidParameter);
    p = {};
    p.max_edge_depth_ratio = 0.5;
    EXPECT_THROW(p.validate(), InvalidParameter);
    EXPECT_THROW((CameraModel{180.0, 10, 10}.validate()), InvalidParameter);
    EXPECT_THROW((CameraModel{90.0, 0, 10}.validate()), InvalidParameter);
}
