#include "sheetlight/io/obj.hpp"

#include <cstdio>
#include <string>

#include "sheetlight/io/text.hpp"

namespace sheetlight::io {

void write_obj(const std::string& path, const geom::SheetMesh& mesh) {
    std::string out;
    out.reserve(mesh.vertices.size() * 64 + mesh.faces.size() * 32);
    char line[160];
    std::snprintf(line, sizeof line, "# sheet mesh %dx%d\n", mesh.grid_size, mesh.grid_size);
    out += line;
    for (const Vec3& v : mesh.vertices) {
        std::snprintf(line, sizeof line, "v %.9g %.9g %.9g\n", v.x, v.y, v.z);
        out += line;
    }
    for (const Vec3& n : mesh.normals) {
        std::snprintf(line, sizeof line, "vn %.6f %.6f %.6f\n", n.x, n.y, n.z);
        out += line;
    }
    const bool has_normals = mesh.normals.size() == mesh.vertices.size();
    auto emit_faces = [&](bool sky) {
        for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
            if (mesh.is_sky_face(f) != sky) continue;
            const auto& t = mesh.faces[f];
            if (has_normals) {
                std::snprintf(line, sizeof line, "f %u//%u %u//%u %u//%u\n", t[0] + 1, t[0] + 1, t[1] + 1, t[1] + 1,
                              t[2] + 1, t[2] + 1);
            } else {
                std::snprintf(line, sizeof line, "f %u %u %u\n", t[0] + 1, t[1] + 1, t[2] + 1);
            }
            out += line;
        }
    };
    out += "g scene\n";
    emit_faces(false);
    out += "g sky\n";
    emit_faces(true);
    write_text_atomic(path, out);
}

}  // namespace sheetlight::io
