#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sheetlight/compose/composite.hpp"
#include "sheetlight/geom/sheet.hpp"
#include "sheetlight/light/lighting.hpp"
#include "sheetlight/shadow/bvh.hpp"
#include "sheetlight/shadow/shadow_map.hpp"

namespace sheetlight::compose {

struct RelightParams {
    double penumbra_scale = 0.02;  // px of blur per depth unit of occluder distance
    double penumbra_max_px = 8.0;
    double ambient = 0.2;          // ambient level for conditions built from CLI/config
    double strength = 0.3;         // reshade strength
    float default_k = kDefaultAttenuation;
    bool recolor_sky = true;
    bool exclude_sky_occluders = true;
    double shadow_bias = 1e-3;
    int workers = 1;

    void validate() const;
};

/// The geometric buffers handed to shadow refinement and compositing.
struct BufferSet {
    Grid<Vec3> normal_map;
    Grid<float> reflectance_src;
    Grid<float> reflectance_map;  // under the target sun
    shadow::ShadowMap coarse_src;
    shadow::ShadowMap coarse_tgt;
    RefinedShadowMap refined_src;
    RefinedShadowMap refined_tgt;
    Mask sky;
    ShadowAttenuation attenuation;
};

/// Which lighting a coarse map belongs to.
enum class ShadowRole { source, target };

/// Turns a coarse cast-shadow map into soft attenuation. The classical
/// implementation blurs by occluder distance; ExternalRefiner delegates to
/// another program, e.g. a learned refinement network.
class ShadowRefiner {
public:
    virtual ~ShadowRefiner() = default;
    virtual RefinedShadowMap refine(const shadow::ShadowMap& coarse, const BufferSet& buffers,
                                    ShadowRole role) const = 0;
};

class ClassicalRefiner final : public ShadowRefiner {
public:
    ClassicalRefiner(double penumbra_scale, double max_radius_px, int workers)
        : penumbra_scale_(penumbra_scale), max_radius_px_(max_radius_px), workers_(workers) {}

    RefinedShadowMap refine(const shadow::ShadowMap& coarse, const BufferSet& buffers,
                            ShadowRole role) const override;

private:
    double penumbra_scale_;
    double max_radius_px_;
    int workers_;
};

/// Runs `<command> --in <coarse.png> --buffers <dir> --out <refined.png>` in
/// a scratch directory. The buffer directory holds normal.png and
/// reflectance.png; the program must exit 0 and write an 8- or 16-bit
/// grayscale PNG of the input size, where white is full shadow.
class ExternalRefiner final : public ShadowRefiner {
public:
    ExternalRefiner(std::string command, std::filesystem::path scratch_dir)
        : command_(std::move(command)), scratch_(std::move(scratch_dir)) {}

    RefinedShadowMap refine(const shadow::ShadowMap& coarse, const BufferSet& buffers,
                            ShadowRole role) const override;

private:
    std::string command_;
    std::filesystem::path scratch_;
};

struct StageTiming {
    std::string stage;
    double milliseconds = 0.0;
};

struct FrameResult {
    RgbImage relit;
    BufferSet buffers;
    std::vector<StageTiming> timings;
};

/// Source-side work for one frame, computed once and shared by every target
/// lighting: sheet mesh, accelerator, normal and source buffers, attenuation
/// estimate and the shadow-free image.
class FrameRelighter {
public:
    /// `refiner` may be null for the classical refiner. Errors are rethrown
    /// as StageError tagged with the failing stage.
    FrameRelighter(RgbImage image, const geom::InverseDepthMap& depth, const geom::CameraModel& cam,
                   const light::LightingCondition& source, const geom::GeometryParams& geometry,
                   const RelightParams& params, std::shared_ptr<const ShadowRefiner> refiner = nullptr);

    FrameResult relight(const light::LightingCondition& target) const;

    const geom::SheetMesh& mesh() const noexcept { return mesh_; }
    const shadow::Bvh& accelerator() const noexcept { return accel_; }
    const BufferSet& source_buffers() const noexcept { return source_; }
    const std::vector<StageTiming>& timings() const noexcept { return timings_; }

private:
    RgbImage image_;
    geom::CameraModel cam_;
    light::LightingCondition source_cond_;
    RelightParams params_;
    std::shared_ptr<const ShadowRefiner> refiner_;
    geom::SheetMesh mesh_;
    shadow::Bvh accel_;
    BufferSet source_;
    RgbImage shadow_free_;
    std::vector<StageTiming> timings_;
};

/// clamp -> sample -> mesh -> smooth -> normals -> accelerator -> source and
/// target shadow maps -> refine -> estimate k -> remove -> reshade -> insert
/// -> recolour sky.
FrameResult relight_frame(const RgbImage& image, const geom::InverseDepthMap& depth, const geom::CameraModel& cam,
                          const light::LightingCondition& source, const light::LightingCondition& target,
                          const geom::GeometryParams& geometry = {}, const RelightParams& params = {});

/// Rounds every channel to the nearest of the 256 levels written to PNG.
RgbImage quantize_u8(RgbImage image);

/// Writes the coarse map as RGBA: RGB = occluder colour, A = 255 if occluded.
void write_shadow_png(const std::string& path, const shadow::ShadowMap& map);
/// Normals encoded as n * 0.5 + 0.5.
void write_normal_png(const std::string& path, const Grid<Vec3>& normals);

/// Writes one frame's buffers into `dir`: normal.png, reflectance.png,
/// shadow_src.png, refined_src.png and sky.png when `with_source` is set,
/// then reflectance_tgt_<i>.png, shadow_tgt_<i>.png, refined_tgt_<i>.png
/// and relit_<i>.png for variant i.
void write_buffer_dump(const std::string& dir, const FrameResult& result, int variant, bool with_source = true);

}  // namespace sheetlight::compose
