#pragma once

// Text format for tensor-product Bernstein (Bézier) patches.
//
//   surface closed|open
//   patch <d_u> <d_v>
//     <(d_u+1)(d_v+1) control points "x y z", row-major: index j (v) is the
//      row, i (u) the column, point P[i][j] at position j*(d_u+1) + i>
//     <flag_u> <flag_v>      one of none | both | low | high
//     <p>                    edge grading order (ignored when both flags are none)
//   patch ...
//
// Tokens are whitespace separated; '#' starts a comment running to the end of
// the line. The patch maps (u, v) in [-1,1]^2 through the Bernstein basis in
// ((u+1)/2, (v+1)/2). Normals follow x_u x x_v.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rpbie/geometry.hpp"

namespace rpbie {

struct BezierControlNet {
  int degree_u = 1;
  int degree_v = 1;
  std::vector<Vec3> points;  ///< size (degree_u+1)(degree_v+1), row-major in v
};

std::shared_ptr<const SurfaceMap> make_bezier_map(BezierControlNet net);

PatchAtlas parse_patch_text(std::string_view text, const std::string& source_name = "<text>");
PatchAtlas load_patch_file(const std::filesystem::path& path);

/// One record of the format; used to write test fixtures and example files.
struct PatchRecord {
  BezierControlNet net;
  EdgeFlag flag_u = EdgeFlag::none;
  EdgeFlag flag_v = EdgeFlag::none;
  int p = kDefaultEdgeOrder;
};

std::string format_patch_text(const std::vector<PatchRecord>& records, bool closed);

}  // namespace rpbie
